#![no_main]

use comma_ea::BitString;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = text.parse::<BitString>() {
        assert_eq!(x.to_string().parse::<BitString>().unwrap(), x);
        assert!(x.onemax() <= x.len());
    }
});
