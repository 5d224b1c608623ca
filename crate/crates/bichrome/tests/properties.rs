use std::sync::LazyLock;

use bichrome::backends;
use bichrome::coend::random_morphism;
use bichrome::repcat::{ProjectiveData, RepCat, Rep};
use cyclo::MatrixS;
use bichrome::completion::CatPresentation;
use bichrome::corpus;
use bichrome::diagrams::{Color, Diagram, Point};
use bichrome::error::Error;
use bichrome::eval::Session;
use bichrome::topology::{compose_defects, linking_signature, maslov, random_lagrangian, CobordismHomology};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

static UQ: LazyLock<(RepCat, ProjectiveData)> = LazyLock::new(|| {
    let cat = RepCat::new(backends::uqsl2()).unwrap();
    let pd = cat.projective_data().unwrap();
    (cat, pd)
});

/// Simples and projective covers of uq; pick `i` modulo their number.
fn uq_object(i: usize) -> Rep {
    let (_, pd) = &*UQ;
    let all: Vec<&Rep> = pd.simples.iter().chain(&pd.covers).collect();
    all[i % all.len()].clone()
}

static ABELIAN: LazyLock<Session> = LazyLock::new(|| Session::new(backends::abelian_modular()).unwrap());

const LABELS: [&str; 3] = ["P1", "V2", "red"];

fn point_text(p: &Point) -> String {
    match p.color {
        Color::Red => format!("red:id({})", if p.positive { "+" } else { "-" }),
        Color::Blue => format!("id({p})"),
    }
}

fn interface_text(ps: &[Point]) -> String {
    if ps.is_empty() {
        "1".into()
    } else {
        ps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
    }
}

/// Interpret (op, position, label) triples as slices over `start`; ops that
/// do not apply at the chosen position become identity slices.
fn build(start: &[Point], ops: &[(u8, u8, u8)]) -> (String, Vec<Point>) {
    build_over(start, ops, 3)
}

/// As `build`, drawing cup labels from the first `labels` entries of LABELS.
fn build_over(start: &[Point], ops: &[(u8, u8, u8)], labels: usize) -> (String, Vec<Point>) {
    let mut cur = start.to_vec();
    let mut text = format!("in: {}\n", interface_text(&cur));
    for &(op, pos, lab) in ops {
        let n = cur.len();
        let i = if n == 0 { 0 } else { pos as usize % (n + 1) };
        let mut toks: Vec<String> = cur.iter().map(point_text).collect();
        match op % 6 {
            // cup
            0 => {
                let label = LABELS[lab as usize % labels];
                let positive = lab % 2 == 0;
                let (tok, a) = if label == "red" {
                    (format!("red:cup({})", if positive { "+" } else { "-" }), Point::red(positive))
                } else {
                    let a = Point::blue(label, positive);
                    (format!("cup({a})"), a)
                };
                toks.insert(i, tok);
                cur.splice(i..i, [a.clone(), a.opposite()]);
            }
            // cap on a matching adjacent pair
            1 if i + 1 < n && cur[i + 1] == cur[i].opposite() => {
                toks.splice(i..i + 2, ["cap".to_string()]);
                cur.drain(i..i + 2);
            }
            2 | 3 if i + 1 < n => {
                toks.splice(i..i + 2, [if op % 6 == 2 { "x+" } else { "x-" }.to_string()]);
                cur.swap(i, i + 1);
            }
            4 | 5 if i < n => {
                toks[i] = if op % 6 == 4 { "tw+" } else { "tw-" }.to_string();
            }
            _ => {}
        }
        if toks.is_empty() {
            continue;
        }
        text.push_str(&toks.join(" "));
        text.push('\n');
    }
    (text, cur)
}

fn start_interface() -> impl Strategy<Value = Vec<Point>> {
    interface_over(3)
}

fn blue_interface() -> impl Strategy<Value = Vec<Point>> {
    interface_over(2)
}

fn interface_over(labels: u8) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((0u8..labels, any::<bool>()), 0..3).prop_map(|v| {
        v.into_iter()
            .map(|(l, s)| if l == 2 { Point::red(s) } else { Point::blue(LABELS[l as usize], s) })
            .collect()
    })
}

fn ops(max: usize) -> impl Strategy<Value = Vec<(u8, u8, u8)>> {
    prop::collection::vec((any::<u8>(), any::<u8>(), any::<u8>()), 1..max)
}

/// Whether the diagram can be evaluated cheaply: at most 6 strands anywhere
/// and every red component closed.
fn small(d: &Diagram) -> bool {
    d.interfaces().map(|is| is.iter().all(|i| i.len() <= 6)).unwrap_or(false) && d.red_components().is_ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_diagrams_round_trip(start in start_interface(), ops in ops(8)) {
        let (text, out) = build(&start, &ops);
        let d = Diagram::parse(&text).unwrap();
        prop_assert_eq!(d.output().unwrap(), out);
        prop_assert_eq!(Diagram::parse(&d.serialize()).unwrap(), d);
    }

    #[test]
    fn parser_is_total(words in prop::collection::vec(
        prop::sample::select(vec!["cup(P1+)", "cap", "x+", "x-", "tw+", "id(P1-)", "red:cup(+)", "red:id(-)", "coupon(f)",
            "in:", "P1+", "(", ")", "\n", " ", "red:x+", "cup(", "coupon f : P1+ -> P1+ = id", "= basis(1,", "#", "é"]),
        0..20)) {
        let text: String = words.concat();
        match Diagram::parse(&text) {
            Ok(d) => { let _ = d.interfaces(); }
            Err(e) => prop_assert!(matches!(e,
                Error::Syntax { .. } | Error::UnknownLabel(_) | Error::InterfaceMismatch { .. } | Error::Parse(_)), "{e:?}"),
        }
    }

    #[test]
    fn compose_is_associative(start in start_interface(), a in ops(4), b in ops(4), c in ops(4)) {
        let (ta, ia) = build(&start, &a);
        let (tb, ib) = build(&ia, &b);
        let (tc, _) = build(&ib, &c);
        let (da, db, dc) = (Diagram::parse(&ta).unwrap(), Diagram::parse(&tb).unwrap(), Diagram::parse(&tc).unwrap());
        let left = da.compose(&db).unwrap().compose(&dc).unwrap();
        let right = da.compose(&db.compose(&dc).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        if small(&left) {
            let s = &*ABELIAN;
            prop_assert_eq!(s.lrt_evaluate(&left).unwrap().matrix, s.lrt_evaluate(&right).unwrap().matrix);
        }
    }

    #[test]
    fn identity_slices_are_neutral(start in blue_interface(), a in ops(5)) {
        let (ta, ia) = build_over(&start, &a, 2);
        let d = Diagram::parse(&ta).unwrap();
        prop_assume!(!ia.is_empty() && small(&d));
        let id = Diagram::parse(&format!("in: {}\n{}\n", interface_text(&ia), ia.iter().map(point_text).collect::<Vec<_>>().join(" "))).unwrap();
        let s = &*ABELIAN;
        prop_assert_eq!(s.lrt_evaluate(&d.compose(&id).unwrap()).unwrap().matrix, s.lrt_evaluate(&d).unwrap().matrix);
    }

    #[test]
    fn local_moves_cancel(start in blue_interface(), a in ops(5), pos in any::<u8>(), kind in 0u8..3) {
        let (ta, ia) = build_over(&start, &a, 2);
        let d = Diagram::parse(&ta).unwrap();
        prop_assume!(ia.len() >= 2 && small(&d));
        let n = ia.len();
        let i = pos as usize % (n - 1);
        let ids: Vec<String> = ia.iter().map(point_text).collect();
        let line = |mid: &str, width: usize| -> String {
            let mut t = ids[..i].to_vec();
            t.push(mid.to_string());
            t.extend(ids[i + width..].iter().cloned());
            t.join(" ")
        };
        let body = match kind {
            // twist cancellation
            0 => format!("{}\n{}\n", line("tw+", 1), line("tw-", 1)),
            // Reidemeister II
            1 => format!("{}\n{}\n", line("x+", 2), line("x-", 2)),
            _ => format!("{}\n{}\n", line("x-", 2), line("x+", 2)),
        };
        let m = Diagram::parse(&format!("in: {}\n{body}", interface_text(&ia))).unwrap();
        let s = &*ABELIAN;
        prop_assert_eq!(s.lrt_evaluate(&d.compose(&m).unwrap()).unwrap().matrix, s.lrt_evaluate(&d).unwrap().matrix);
    }

    #[test]
    fn uq_ribbon_structure(i in 0usize..6, j in 0usize..6, k in 0usize..3, seed in any::<u64>()) {
        let (cat, pd) = &*UQ;
        let f = cat.field();
        let (x, y) = (uq_object(i), uq_object(j));
        let xy = cat.tensor(&x, &y);
        let cxy = cat.braiding(&x, &y).matrix;
        let cyx = cat.braiding(&y, &x).matrix;
        // balancing
        let tt = cat.twist(&x).matrix.kron(&cat.twist(&y).matrix);
        prop_assert_eq!(cat.twist(&xy).matrix, cyx.try_mul(&cxy).unwrap().try_mul(&tt).unwrap());
        // naturality in the first slot against a random X → X'
        let x2 = uq_object(i + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_morphism(cat, &x, &x2, &mut rng).matrix;
        let idy = MatrixS::identity(f, y.dim);
        let lhs = cat.braiding(&x2, &y).matrix.try_mul(&g.kron(&idy)).unwrap();
        let rhs = idy.kron(&g).try_mul(&cxy).unwrap();
        prop_assert_eq!(lhs, rhs);
        // hexagon c_{X,Y⊗Z} = (id_Y ⊗ c_{X,Z})(c_{X,Y} ⊗ id_Z), Z simple
        let z = pd.simples[k].clone();
        let idz = MatrixS::identity(f, z.dim);
        let yz = cat.tensor(&y, &z);
        let hex = idy.kron(&cat.braiding(&x, &z).matrix).try_mul(&cxy.kron(&idz)).unwrap();
        prop_assert_eq!(cat.braiding(&x, &yz).matrix, hex);
        // projectives form an ideal
        if i >= 3 {
            prop_assert!(cat.is_projective(&xy, pd).unwrap());
        }
    }

    #[test]
    fn validation_is_stable_under_basis_permutation(perm in Just((0..3).collect::<Vec<usize>>()).prop_shuffle()) {
        let h = backends::abelian_modular();
        prop_assert!(h.permuted(&perm).validate().all_pass());
        let z = backends::z2_transparent();
        let p2: Vec<usize> = if perm[0] % 2 == 0 { vec![0, 1] } else { vec![1, 0] };
        prop_assert!(z.permuted(&p2).validate().all_pass());
        prop_assert!(!z.permuted(&p2).factorizability_check());
    }

    #[test]
    fn maslov_is_an_antisymmetric_cocycle(seed in any::<u64>(), g in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l: Vec<Vec<Vec<i64>>> = (0..4).map(|_| random_lagrangian(g, &mut rng)).collect();
        let m = |a: usize, b: usize, c: usize| maslov(&l[a], &l[b], &l[c], g).unwrap();
        prop_assert_eq!(m(0, 0, 0), 0);
        prop_assert_eq!(m(1, 0, 2), -m(0, 1, 2));
        prop_assert_eq!(m(2, 1, 0), -m(0, 1, 2));
        prop_assert_eq!(m(1, 2, 0), m(0, 1, 2));
        prop_assert_eq!(m(1, 2, 3) - m(0, 2, 3) + m(0, 1, 3) - m(0, 1, 2), 0);
        let id = CobordismHomology::identity(g);
        prop_assert_eq!(compose_defects(3, -4, &l[1], &l[1], &l[1], &id, &id).unwrap(), -1);
    }

    #[test]
    fn additive_completion_dimensions(sums in prop::collection::vec(prop::collection::vec(Just(0usize), 1..4), 1..4)) {
        let a = CatPresentation::idempotent_algebra();
        let m = a.additive_completion(&sums).unwrap();
        for (p, x) in sums.iter().enumerate() {
            for (q, y) in sums.iter().enumerate() {
                prop_assert_eq!(m.dims[p][q], x.len() * y.len() * a.dims[0][0]);
            }
        }
    }
}

#[test]
fn admissibility_of_unions_is_a_disjunction() {
    let s = &*ABELIAN;
    let uq = Session::new(backends::uqsl2()).unwrap();
    let closed: Vec<Diagram> = corpus::FIXTURES
        .iter()
        .map(|(_, t)| Diagram::parse(t).unwrap())
        .filter(|d| d.is_closed().unwrap())
        .collect();
    for a in &closed {
        for b in &closed {
            let Ok(u) = a.tensor(b) else { continue };
            for sess in [s, &uq] {
                let want = sess.is_admissible(a).unwrap() || sess.is_admissible(b).unwrap();
                assert_eq!(sess.is_admissible(&u).unwrap(), want);
            }
        }
    }
}

#[test]
fn linking_data_is_additive_under_stacking() {
    let closed: Vec<Diagram> = corpus::FIXTURES
        .iter()
        .map(|(_, t)| Diagram::parse(t).unwrap())
        .filter(|d| d.is_closed().unwrap())
        .collect();
    for a in &closed {
        for b in &closed {
            let Ok(u) = a.compose(b) else { continue };
            let (la, sa) = linking_signature(a).unwrap();
            let (lb, sb) = linking_signature(b).unwrap();
            assert_eq!(linking_signature(&u).unwrap(), (la + lb, sa + sb));
        }
    }
}
