#![no_main]

use libfuzzer_sys::fuzz_target;
use neurocollide::nn::Model;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = Model::from_bytes(data) {
        let again = Model::parse(&model.to_file_string()).expect("written model parses");
        assert_eq!(again.params, model.params);
        assert_eq!(again.level, model.level);
    }
});
