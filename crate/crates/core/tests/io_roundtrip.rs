use ::lipbound::io::{
    kernel_from_raw, kernel_to_raw, load_kernel, save_kernel, BenchRecord, KernelFormat, Method,
};
use ::lipbound::{random_kernel, Error, Kernel, Kernel32, KernelDist};
use proptest::prelude::*;

fn roundtrip(k: &Kernel, format: KernelFormat) -> Kernel {
    let dir = tempfile::tempdir().unwrap();
    let ext = match format {
        KernelFormat::Json => "json",
        KernelFormat::Raw => "bin",
    };
    let path = dir.path().join(format!("k.{ext}"));
    save_kernel(k, &path, format).unwrap();
    assert_eq!(KernelFormat::from_path(&path), format);
    load_kernel(&path, format).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn both_formats_are_bit_exact(seed in any::<u64>(), cout in 1usize..4, cin in 1usize..4, s in prop_oneof![Just(1usize), Just(3), Just(5)]) {
        let k: Kernel = random_kernel(seed, cout, cin, s, KernelDist::default()).unwrap();
        prop_assert_eq!(&roundtrip(&k, KernelFormat::Json), &k);
        prop_assert_eq!(&roundtrip(&k, KernelFormat::Raw), &k);
    }
}

#[test]
fn extreme_values_survive_json() {
    let data = vec![f64::MIN_POSITIVE, -f64::MAX, 1e-300, 0.1, -0.0, 1.0 / 3.0, 5e-324, 2.0, 7.0];
    let k = Kernel::new(1, 1, 3, data).unwrap();
    let back = roundtrip(&k, KernelFormat::Json);
    for (a, b) in k.data().iter().zip(back.data()) {
        assert_eq!(a.to_bits() & !(1 << 63), b.to_bits() & !(1 << 63));
    }
}

#[test]
fn single_precision_loads_from_f64_files() {
    let k: Kernel = random_kernel(4, 2, 2, 3, KernelDist::default()).unwrap();
    let bytes = kernel_to_raw(&k);
    let k32: Kernel32 = kernel_from_raw(&bytes).unwrap();
    for (a, b) in k.data().iter().zip(k32.data()) {
        assert_eq!(*a as f32, *b);
    }
}

#[test]
fn truncated_and_malformed_raw_files_are_rejected() {
    let k: Kernel = random_kernel(0, 1, 2, 3, KernelDist::default()).unwrap();
    let bytes = kernel_to_raw(&k);
    for cut in [0, 10, 27, bytes.len() - 8, bytes.len() - 3] {
        assert!(
            matches!(kernel_from_raw::<f64>(&bytes[..cut]), Err(Error::Parse { .. } | Error::DimMismatch { .. })),
            "cut {cut}"
        );
    }
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(kernel_from_raw::<f64>(&bad), Err(Error::Parse { ref field, .. }) if field == "magic"));
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_kernel::<f64>(dir.path().join("absent.json"), KernelFormat::Json).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
}

#[test]
fn json_even_size_is_unsupported() {
    let err = ::lipbound::io::kernel_from_json::<f64>(br#"{"cout":1,"cin":1,"s":2,"data":[1,2,3,4]}"#)
        .unwrap_err();
    assert!(matches!(err, Error::UnsupportedShape(_)), "{err:?}");
}

#[test]
fn bench_records_serialize_with_params() {
    let r = BenchRecord::new(Method::PowerMethod, 1.5, 0.25)
        .unwrap()
        .with_param("iterations", 10)
        .with_param("n", 32);
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    assert_eq!(v["method"], "power_method");
    assert_eq!(v["params"]["iterations"], 10);
    let back: BenchRecord = serde_json::from_value(v).unwrap();
    assert_eq!(back, r);
    assert!(BenchRecord::new(Method::Lipbound, f64::NAN, 0.0).is_err());
}
