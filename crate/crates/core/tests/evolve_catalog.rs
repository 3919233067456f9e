use burgers_lab::catalog;
use burgers_lab::evolve::{cross_validate, IbvpSetup};

fn instance(id: &str, k: usize) -> catalog::FamilyInstance {
    let spec = catalog::family(id).unwrap();
    spec.build(&spec.default_params()[k]).unwrap()
}

#[test]
fn smooth_families_converge_at_second_order() {
    let cases = [("hopf_cole_2d", 0), ("shift_invariant", 1), ("ns_common", 0), ("darboux", 0), ("affine_in_y", 1), ("heun", 0)];
    for (id, k) in cases {
        let inst = instance(id, k);
        let setup = IbvpSetup::on_box(&inst.test_box, 17, 0.1).unwrap();
        let r = cross_validate(inst.field.as_ref(), &setup, 3).unwrap();
        assert!(!r.exact && r.order() >= 1.5, "{id}: {r:?}");
        if id == "hopf_cole_2d" || id == "darboux" {
            assert!(r.orders.iter().all(|o| (1.7..=2.3).contains(o)), "{id}: {r:?}");
        }
    }
}

#[test]
fn affine_families_are_reproduced_to_rounding() {
    let mut cases: Vec<(&str, usize)> = (0..3).flat_map(|k| [("affine_general", k), ("affine_degenerate", k)]).collect();
    cases.push(("hj_family", 0));
    for (id, k) in cases {
        let inst = instance(id, k);
        let base = IbvpSetup::on_box(&inst.test_box, 9, 0.1).unwrap();
        let setup = IbvpSetup { dt: 0.02 * base.stability_bound(), ..base };
        let r = cross_validate(inst.field.as_ref(), &setup, 3).unwrap();
        assert!(r.exact, "{id} {k}: {r:?}");
    }
}

#[test]
fn mirrored_family_evolves_to_the_mirror_image() {
    let a = instance("affine_in_y", 2);
    let b = instance("affine_in_x", 2);
    let s = IbvpSetup::new((-1.0, 1.0), (-1.0, 1.0), [17, 17], (0.5, 0.6)).unwrap();
    let ea = s.evolve(a.field.as_ref()).unwrap().mirrored();
    let eb = s.mirrored().evolve(b.field.as_ref()).unwrap();
    let gap = ea.u.iter().zip(&eb.u).chain(ea.v.iter().zip(&eb.v)).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    assert!(gap < 1e-13, "{gap}");
}
