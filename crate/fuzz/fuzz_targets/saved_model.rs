#![no_main]

use gapnet::gapnet::SavedModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(model) = SavedModel::from_json(text) {
        let json = model.to_json().expect("serialize accepted model");
        assert_eq!(SavedModel::from_json(&json).expect("re-parse"), model);
    }
});
