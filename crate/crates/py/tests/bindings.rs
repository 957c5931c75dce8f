use qlrc_py::*;

#[test]
fn bound_wrappers() {
    assert_eq!(qtb_dim(13, 3, 8).unwrap(), 2);
    assert!((qtb_distance_lower(7, 3, 4).unwrap() - 1.394).abs() < 5e-4);
    assert!((qtb_distance_upper(13, 3, 8).unwrap() - 25.0 / 3.0).abs() < 1e-12);
    assert_eq!(decode_radius_qtb(127, 3, 80).unwrap(), 10);
    assert!(uncertainty_holds(13, 3).unwrap());
    assert!(!uncertainty_holds(64, 7).unwrap());
    assert_eq!(singleton_partition_cap(6, 2, 3), 2);
    assert!(qtb_dim(13, 3, 5).is_err());
}

#[test]
fn code_object() {
    let c = QtbCode::new(7, 3, 4, 1).unwrap();
    assert_eq!((c.n(), c.k(), c.s()), (6, 2, 1));
    assert_eq!(c.distance(1 << 20).unwrap(), 2);
    let d: serde_json::Value = serde_json::from_str(&c.descriptor()).unwrap();
    assert_eq!(d["family"], "qtb");
    assert_eq!(c.generator().len(), 4);
    assert!(c.decode(vec![0; 6], vec![0; 6], 0).unwrap());
    assert!(c.decode(vec![0; 5], vec![0; 6], 0).is_err());
    assert!(QtbCode::new(13, 3, 8, 3).is_err());
}
