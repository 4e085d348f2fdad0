#![no_main]

use libfuzzer_sys::fuzz_target;
use neurocollide::geometry::io::{parse_obj, to_obj_string};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(mesh) = parse_obj(text) {
        let again = parse_obj(&to_obj_string(&mesh)).expect("written OBJ parses");
        assert_eq!(again.face_count(), mesh.face_count());
    }
});
