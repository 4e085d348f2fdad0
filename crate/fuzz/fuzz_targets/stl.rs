#![no_main]

use libfuzzer_sys::fuzz_target;
use neurocollide::geometry::io::{parse_stl_ascii, to_stl_string};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(mesh) = parse_stl_ascii(text) {
        let again = parse_stl_ascii(&to_stl_string(&mesh, "fuzz")).expect("written STL parses");
        assert_eq!(again.face_count(), mesh.face_count());
    }
});
