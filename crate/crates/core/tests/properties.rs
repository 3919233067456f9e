use burgers_lab::catalog::{self, FamilyInstance};
use burgers_lab::fields::{fd_derivative, Component, FieldHandle, MultiIndex, Point};
use burgers_lab::heat_kit::{HeatAtom, HeatSolution1D, HeatSolution2D};
use burgers_lab::lie_algebra::{apply_to_field, basis, commutator, coordinates, Generator};
use burgers_lab::reduce::{conserved_current_divergence, ReducedSolution};
use burgers_lab::sym_group::{act_field, preservation_check, random_element, FlowParam, GroupElement};
use burgers_lab::verify::{burgers_residual, constraint_values, potential_residuals, PotentialEquation};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(k: usize, set: usize) -> FamilyInstance {
    let spec = &catalog::families()[k];
    spec.build(&spec.default_params()[set]).unwrap()
}

fn element(seed: u64) -> GroupElement {
    random_element(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn point_in(inst: &FamilyInstance, f: [f64; 3]) -> Point {
    let b = inst.test_box;
    let lerp = |r: (f64, f64), s: f64| r.0 + s * (r.1 - r.0);
    Point::new(lerp(b.t, f[0]), lerp(b.x, f[1]), lerp(b.y, f[2])).unwrap()
}

fn family_count() -> usize {
    catalog::families().len()
}

fn exp_atom() -> impl Strategy<Value = HeatAtom> {
    (0.1..1.2f64, any::<bool>()).prop_map(|(lambda, up)| HeatAtom::Exp { lambda, sign: if up { 1.0 } else { -1.0 } })
}

fn heat_atom() -> impl Strategy<Value = HeatSolution1D> {
    (exp_atom(), 0.1..1.5f64).prop_map(|(a, c)| HeatSolution1D::atom(c, a))
}

/// Positive solutions of the 2D heat equation on `t > 0`.
fn positive_heat() -> impl Strategy<Value = HeatSolution2D> {
    (0.3..2.0f64, prop::collection::vec((heat_atom(), heat_atom()), 1..3), prop::option::of((-1.0..0.0f64, -1.0..1.0f64, -1.0..1.0f64)))
        .prop_map(|(c, products, gauss)| {
            let mut phi = HeatSolution2D::constant(c);
            for (a, b) in products {
                phi = phi.plus(HeatSolution2D::product(1.0, a, b));
            }
            if let Some((t0, x0, y0)) = gauss {
                phi = phi.plus(HeatSolution2D::gauss(t0, x0, y0));
            }
            phi
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn group_composition_is_associative_with_inverses(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let (a, b, c) = (element(s1), element(s2), element(s3));
        let id = GroupElement::identity();
        let left = a.compose(&b).and_then(|ab| ab.compose(&c));
        let right = b.compose(&c).and_then(|bc| a.compose(&bc));
        if let (Ok(l), Ok(r)) = (left, right) {
            prop_assert!(l.distance(&r).unwrap() < 1e-10);
        }
        let inv = a.inverse().unwrap();
        prop_assert!(inv.compose(&a).unwrap().distance(&id).unwrap() < 1e-10);
        prop_assert!(a.compose(&inv).unwrap().distance(&id).unwrap() < 1e-10);
    }

    #[test]
    fn action_on_points_is_a_group_action(s1 in any::<u64>(), s2 in any::<u64>(), f in prop::array::uniform3(-1.0..1.0f64), uv in (-2.0..2.0f64, -2.0..2.0f64)) {
        let (a, b) = (element(s1), element(s2));
        let p = Point::from_coords(f).unwrap();
        let step = b.act_point(&p, uv).and_then(|(q, w)| a.act_point(&q, w));
        let direct = a.compose(&b).and_then(|ab| ab.act_point(&p, uv));
        if let (Ok((q1, w1)), Ok((q2, w2))) = (step, direct) {
            let scale = 1.0 + q1.coords().iter().chain([w1.0, w1.1].iter()).fold(0.0f64, |m, v| m.max(v.abs()));
            let gap = q1.coords().iter().zip(q2.coords()).map(|(x, y)| (x - y).abs())
                .chain([(w1.0 - w2.0).abs(), (w1.1 - w2.1).abs()])
                .fold(0.0f64, f64::max);
            prop_assert!(gap < 1e-9 * scale, "{gap}");
        }
    }

    #[test]
    fn group_images_of_families_stay_solutions(seed in any::<u64>(), k in 0..13usize, set in 0..3usize) {
        prop_assume!(k < family_count());
        let inst = instance(k, set);
        let points = inst.test_box.grid([3, 3, 3]).unwrap().points();
        let r = preservation_check(&element(seed), inst.field.clone(), &points, 10.0 * inst.tolerance).unwrap();
        prop_assert!(r.pass, "{} {}: {r:?}", inst.family, inst.params);
    }

    #[test]
    fn flow_derivative_is_the_characteristic(g in 0..8usize, k in 0..13usize, f in prop::array::uniform3(0.1..0.9f64)) {
        prop_assume!(k < family_count());
        let inst = instance(k, 0);
        let p = point_in(&inst, f);
        let generator = Generator::ALL[g];
        let h = 1e-4;
        let at = |e: f64| act_field(&GroupElement::flow(FlowParam { generator, epsilon: e }), inst.field.clone()).unwrap().eval(&p);
        let vals = [at(h), at(-h), at(2.0 * h), at(-2.0 * h)];
        prop_assume!(vals.iter().all(|v| v.is_ok()));
        let [a, b, a2, b2] = vals.map(|v| v.unwrap());
        let du = (8.0 * (a.0 - b.0) - (a2.0 - b2.0)) / (12.0 * h);
        let dv = (8.0 * (a.1 - b.1) - (a2.1 - b2.1)) / (12.0 * h);
        let q = apply_to_field(&generator.field(), inst.field.as_ref(), &p).unwrap();
        let scale = 1.0 + q.0.abs() + q.1.abs();
        prop_assert!((du - q.0).abs().max((dv - q.1).abs()) < 1e-6 * scale, "{} {generator}: ({du}, {dv}) vs {q:?}", inst.family);
    }

    #[test]
    fn hopf_cole_fields_solve_the_system_and_the_potential_equation(phi in positive_heat()) {
        let grid = catalog::family("hopf_cole_2d").unwrap().test_box.grid([3, 4, 4]).unwrap();
        let field = catalog::hopf_cole_2d(&phi);
        let r = burgers_residual(field.as_ref(), &grid, 1e-10).unwrap();
        prop_assert!(r.pass && r.masked == 0, "{}", r.max_residual());
        prop_assert!(constraint_values(field.as_ref(), &grid).unwrap()[0].max < 1e-10);
        let pot = catalog::hopf_cole_potential(&phi);
        prop_assert!(potential_residuals(pot.jet.as_ref(), &grid, PotentialEquation::Gradient, 1e-9).unwrap().pass);
    }

    #[test]
    fn reduced_18_solutions_conserve_the_current(a in exp_atom(), b in heat_atom(), c in 0.5..2.0f64, z in (0.1..1.5f64, -1.5..1.5f64)) {
        let theta1 = HeatSolution1D::constant(c).with(1.0, a);
        let rs = ReducedSolution::hopf_cole_18(&theta1, &b);
        let d = conserved_current_divergence(&rs, [z.0, z.1]).unwrap();
        prop_assert!(d.abs() < 1e-8, "{d}");
    }

    #[test]
    fn evaluation_is_repeatable(k in 0..13usize, set in 0..3usize, f in prop::array::uniform3(0.0..1.0f64)) {
        prop_assume!(k < family_count());
        let inst = instance(k, set);
        let p = point_in(&inst, f);
        let first = inst.field.local(&p).unwrap();
        let again = inst.field.local(&p).unwrap();
        prop_assert_eq!(first, again);
    }

    #[test]
    fn analytic_derivatives_match_finite_differences(k in 0..13usize, set in 0..3usize, f in prop::array::uniform3(0.1..0.9f64)) {
        prop_assume!(k < family_count());
        let inst = instance(k, set);
        let p = point_in(&inst, f);
        let jets = inst.field.local(&p).unwrap();
        for (c, jet) in [(Component::U, &jets[0]), (Component::V, &jets[1])] {
            let scale = 1.0 + jet.max_abs();
            for (mi, exact) in [(MultiIndex::T, jet.g[0]), (MultiIndex::X, jet.g[1]), (MultiIndex::Y, jet.g[2]), (MultiIndex::XX, jet.h[3]), (MultiIndex::YY, jet.h[5])] {
                let h = 1e-3;
                let fd = fd_derivative(inst.field.as_ref(), &p, c, mi, h).unwrap();
                prop_assert!((fd - exact).abs() < 1e-5 * scale, "{} {} {mi:?}: {fd} vs {exact}", inst.family, inst.params);
            }
        }
    }
}

#[test]
fn radical_is_an_ideal() {
    let b = basis();
    for g in Generator::ALL {
        for r in Generator::ALL.into_iter().filter(|r| r.in_radical()) {
            let c = coordinates(&commutator(&b[g.index()], &b[r.index()]).unwrap()).expect("bracket stays in the algebra");
            for h in Generator::ALL.into_iter().filter(|h| !h.in_radical()) {
                assert_eq!(*c[h.index()].numer(), 0, "[{g},{r}] leaves the radical");
            }
        }
    }
}

#[test]
fn mirror_image_of_every_family_is_a_solution() {
    let m = GroupElement::mirror();
    for spec in catalog::families() {
        for params in spec.default_params() {
            let inst = spec.build(&params).unwrap();
            let image: FieldHandle = act_field(&m, inst.field.clone()).unwrap();
            let b = inst.test_box;
            // the mirror sends x to -x
            let grid = burgers_lab::fields::Grid::uniform((b.t.0, b.t.1, 4), (-b.x.1, -b.x.0, 5), (b.y.0, b.y.1, 5)).unwrap();
            let r = burgers_residual(image.as_ref(), &grid, 10.0 * inst.tolerance).unwrap();
            assert!(r.pass && r.masked == 0, "{} {params}: {}", spec.id, r.max_residual());
        }
    }
}
