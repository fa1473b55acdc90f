#![no_main]

use gapnet::dataset::{read_csv, write_csv, CsvOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let opts = CsvOptions::default();
    if let Ok(ds) = read_csv(data, &opts) {
        // anything accepted must survive a write/read cycle unchanged
        let mut out = Vec::new();
        write_csv(&ds, &mut out, &opts).expect("write accepted dataset");
        let again = read_csv(&out[..], &opts).expect("re-read written dataset");
        assert_eq!(again.n_rows(), ds.n_rows());
        assert_eq!(again.present_mask(), ds.present_mask());
        assert_eq!(again.labels(), ds.labels());
    }
});
