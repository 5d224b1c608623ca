//! Evaluation of bichrome diagrams: the Reshetikhin–Turaev functor on blue
//! diagrams, its extension to red (surgery) components, the modified trace
//! and the renormalized invariant of closed admissible diagrams.
//!
//! Red strands carry the regular module H (red − carries H*). Every red
//! component gets exactly one integral insertion, placed at its first cup:
//! `red:cup(+)` emits 1 ⊗ λ(g·), `red:cup(-)` emits λ ⊗ 1, λ the right
//! cointegral. All other cups, caps, crossings and twists act as on blue
//! strands.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};

use cyclo::{roots_in_field, Field, MatrixS, Poly, Scalar};
use smallvec::SmallVec;

use crate::diagrams::{Color, CouponValue, Diagram, Point, Token};
use crate::error::{Error, Result};
use crate::hopf::{dot, Elt, HopfPresentation};
use crate::repcat::{HomSpace, MorRep, ProjectiveData, Rep, RepCat};
use crate::sparse::SpMat;

/// ±1-framed red unknots.
pub const O_PLUS: &str = "# positive unknot\nred:cup(+)\ntw+ red:id(-)\ncap\n";
pub const O_MINUS: &str = "# negative unknot\nred:cup(+)\ntw- red:id(-)\ncap\n";

/// Stabilization data: Δ± = F_Λ(O±), D² = Δ₊Δ₋, δ = Δ₊/D, ζ = D².
#[derive(Clone, Debug, PartialEq)]
pub struct StabData {
    pub delta_plus: Scalar,
    pub delta_minus: Scalar,
    pub d: Scalar,
    pub delta: Scalar,
    pub zeta: Scalar,
}

/// Output of an evaluation: a (out × in) matrix between the tensor products
/// of the boundary objects.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub matrix: MatrixS,
    pub input: Vec<Point>,
    pub output: Vec<Point>,
}

impl Evaluation {
    /// The value of a closed diagram.
    pub fn scalar(&self) -> Scalar {
        self.matrix.get(0, 0).clone()
    }
}

/// Local operator on a run of contiguous legs: column j lists (row, value).
struct LocalOp {
    out_dims: Vec<usize>,
    in_dims: Vec<usize>,
    cols: Vec<Vec<(usize, Scalar)>>,
}

impl LocalOp {
    fn from_sp(m: &SpMat, in_dims: Vec<usize>, out_dims: Vec<usize>) -> LocalOp {
        let t = m.transpose();
        LocalOp { out_dims, in_dims, cols: (0..t.rows()).map(|j| t.row(j).to_vec()).collect() }
    }

    fn vector(v: Vec<(usize, Scalar)>, out_dims: Vec<usize>) -> LocalOp {
        LocalOp { out_dims, in_dims: vec![], cols: vec![v] }
    }
}

type Key = SmallVec<[u32; 12]>;

/// Sparse tensor with a leading column leg.
struct State {
    f: &'static Field,
    dims: Vec<usize>,
    map: HashMap<Key, Scalar>,
}

impl State {
    fn identity(f: &'static Field, dims: Vec<usize>) -> State {
        let n: usize = dims.iter().product();
        let mut map = HashMap::with_capacity(n);
        for c in 0..n {
            let mut k: Key = SmallVec::new();
            k.push(c as u32);
            let mut rest = c;
            let mut digits = vec![0u32; dims.len()];
            for (t, d) in dims.iter().enumerate().rev() {
                digits[t] = (rest % d) as u32;
                rest /= d;
            }
            k.extend(digits);
            map.insert(k, Scalar::one(f));
        }
        State { f, dims, map }
    }

    /// Apply `op` to legs [at, at + op.in_dims.len()).
    fn apply(&mut self, at: usize, op: &LocalOp) {
        let k = op.in_dims.len();
        debug_assert_eq!(&self.dims[at..at + k], op.in_dims.as_slice());
        let mut out: HashMap<Key, Scalar> = HashMap::with_capacity(self.map.len());
        let mut digits = vec![0u32; op.out_dims.len()];
        for (key, val) in self.map.drain() {
            let mut j = 0usize;
            for t in 0..k {
                j = j * op.in_dims[t] + key[1 + at + t] as usize;
            }
            for (i, c) in &op.cols[j] {
                let mut rest = *i;
                for t in (0..op.out_dims.len()).rev() {
                    digits[t] = (rest % op.out_dims[t]) as u32;
                    rest /= op.out_dims[t];
                }
                let mut nk: Key = SmallVec::with_capacity(key.len() + digits.len());
                nk.extend_from_slice(&key[..1 + at]);
                nk.extend_from_slice(&digits);
                nk.extend_from_slice(&key[1 + at + k..]);
                let p = &val * c;
                match out.get_mut(&nk) {
                    Some(v) => *v += &p,
                    None => {
                        out.insert(nk, p);
                    }
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        self.map = out;
        self.dims.splice(at..at + k, op.out_dims.iter().copied());
    }

    fn to_matrix(&self, ncols: usize) -> MatrixS {
        let rows: usize = self.dims.iter().product();
        let mut m = MatrixS::zeros(self.f, rows, ncols);
        for (key, v) in &self.map {
            let mut r = 0usize;
            for (t, d) in self.dims.iter().enumerate() {
                r = r * d + key[1 + t] as usize;
            }
            m.set(r, key[0] as usize, v.clone());
        }
        m
    }
}

/// Everything the evaluator needs: the category, the integral insertions and
/// (once available) the projective data used by special coupons.
struct Engine<'a> {
    cat: &'a RepCat,
    pd: Option<&'a ProjectiveData>,
    coend: Option<&'a Rep>,
    mu_plus: Vec<Scalar>,
    lambda: Vec<Scalar>,
}

/// Functionals λ and μ₊ = λ(g·) in coordinates.
fn insertion_functionals(cat: &RepCat) -> (Vec<Scalar>, Vec<Scalar>) {
    let h = &*cat.h;
    let lam = cat.se.right_cointegral.clone();
    let mu: Vec<Scalar> = (0..h.d).map(|i| dot(&lam, &h.mul(&cat.se.pivot_g, &h.basis(i)))).collect();
    (lam, mu)
}

type LegKey = (Color, String, bool);

struct Run<'e, 'a> {
    e: &'e Engine<'a>,
    d: &'e Diagram,
    legs: HashMap<LegKey, Rep>,
    labels: HashMap<String, Rep>,
    ops: HashMap<String, Arc<LocalOp>>,
}

impl<'e, 'a> Run<'e, 'a> {
    fn f(&self) -> &'static Field {
        self.e.cat.field()
    }

    fn label(&mut self, name: &str) -> Result<Rep> {
        if let Some(r) = self.labels.get(name) {
            return Ok(r.clone());
        }
        let r = resolve_label(self.e.cat, self.e.pd, self.e.coend, self.d, name)?;
        self.labels.insert(name.to_string(), r.clone());
        Ok(r)
    }

    fn leg(&mut self, p: &Point) -> Result<Rep> {
        let key = (p.color, p.label.clone(), p.positive);
        if let Some(r) = self.legs.get(&key) {
            return Ok(r.clone());
        }
        let base = match p.color {
            Color::Red => self.e.cat.regular.clone(),
            Color::Blue => self.label(&p.label)?,
        };
        let r = if p.positive { base } else { self.e.cat.dual(&base) };
        self.legs.insert(key, r.clone());
        Ok(r)
    }

    /// The rep of the label itself (not of the oriented leg).
    fn base(&mut self, p: &Point) -> Result<Rep> {
        self.leg(&Point { positive: true, ..p.clone() })
    }

    fn cached(&mut self, key: String, make: impl FnOnce(&mut Self) -> Result<LocalOp>) -> Result<Arc<LocalOp>> {
        if let Some(op) = self.ops.get(&key) {
            return Ok(op.clone());
        }
        let op = Arc::new(make(self)?);
        self.ops.insert(key, op.clone());
        Ok(op)
    }

    fn cup(&mut self, p: &Point, insert: bool) -> Result<Arc<LocalOp>> {
        let key = format!("cup {p} {insert}");
        self.cached(key, |run| {
            let f = run.f();
            let x = run.base(p)?;
            let n = x.dim;
            let dims = vec![n, n];
            if insert {
                let unit = &run.e.cat.h.unit;
                let mut v = Vec::new();
                for a in 0..n {
                    for i in 0..n {
                        // (+): 1 ⊗ μ₊ on H⊗H*, (−): λ ⊗ 1 on H*⊗H
                        let c = if p.positive { &unit[a] * &run.e.mu_plus[i] } else { &run.e.lambda[a] * &unit[i] };
                        if !c.is_zero() {
                            v.push((a * n + i, c));
                        }
                    }
                }
                return Ok(LocalOp::vector(v, dims));
            }
            if p.positive {
                Ok(LocalOp::vector((0..n).map(|i| (i * n + i, Scalar::one(f))).collect(), dims))
            } else {
                let gi = run.e.cat.act(&x, &run.e.cat.se.pivot_g_inv);
                // Σ eⁱ ⊗ g⁻¹eᵢ: entry (i, j) = (g⁻¹)_{j i}
                let mut v = Vec::new();
                for j in 0..n {
                    for (i, c) in gi.row(j) {
                        v.push((i * n + j, c.clone()));
                    }
                }
                Ok(LocalOp::vector(v, dims))
            }
        })
    }

    fn cap(&mut self, a: &Point) -> Result<Arc<LocalOp>> {
        let key = format!("cap {a}");
        self.cached(key, |run| {
            let f = run.f();
            let x = run.base(a)?;
            let n = x.dim;
            let mut row = Vec::new();
            if a.positive {
                // x⊗φ ↦ φ(gx)
                let g = run.e.cat.act(&x, &run.e.cat.se.pivot_g);
                for j in 0..n {
                    for (xi, c) in g.row(j) {
                        row.push((xi * n + j, c.clone()));
                    }
                }
            } else {
                row = (0..n).map(|i| (i * n + i, Scalar::one(f))).collect();
            }
            let m = SpMat::from_rows(f, 1, n * n, vec![row]);
            Ok(LocalOp::from_sp(&m, vec![n, n], vec![]))
        })
    }

    fn cross(&mut self, pos: bool, a: &Point, b: &Point) -> Result<Arc<LocalOp>> {
        let key = format!("x{pos} {a} {b}");
        self.cached(key, |run| {
            let (ra, rb) = (run.leg(a)?, run.leg(b)?);
            let m = if pos { run.e.cat.braiding_sp(&ra, &rb) } else { run.e.cat.braiding_inv_sp(&rb, &ra) };
            Ok(LocalOp::from_sp(&m, vec![ra.dim, rb.dim], vec![rb.dim, ra.dim]))
        })
    }

    fn twist(&mut self, pos: bool, a: &Point) -> Result<Arc<LocalOp>> {
        let key = format!("tw{pos} {a}");
        self.cached(key, |run| {
            let x = run.leg(a)?;
            let se = &run.e.cat.se;
            let m = run.e.cat.act(&x, if pos { &se.ribbon_inv } else { &run.e.cat.h.ribbon });
            Ok(LocalOp::from_sp(&m, vec![x.dim], vec![x.dim]))
        })
    }

    fn coupon(&mut self, name: &str) -> Result<Arc<LocalOp>> {
        let key = format!("coupon {name}");
        self.cached(key, |run| {
            let def = run.d.coupon(name).ok_or_else(|| Error::UnknownLabel(name.to_string()))?.clone();
            let src: Vec<Rep> = def.src.iter().map(|p| run.leg(p)).collect::<Result<_>>()?;
            let tgt: Vec<Rep> = def.tgt.iter().map(|p| run.leg(p)).collect::<Result<_>>()?;
            let m = coupon_matrix(run.e, name, &def.src, &def.tgt, &src, &tgt, &def.value)?;
            let sp = SpMat::from_dense(&m);
            Ok(LocalOp::from_sp(&sp, src.iter().map(|r| r.dim).collect(), tgt.iter().map(|r| r.dim).collect()))
        })
    }
}

fn tensor_or_unit(cat: &RepCat, xs: &[Rep]) -> Rep {
    if xs.is_empty() {
        cat.trivial.clone()
    } else {
        cat.tensor_all(xs)
    }
}

fn coupon_matrix(
    e: &Engine<'_>,
    name: &str,
    src_pts: &[Point],
    tgt_pts: &[Point],
    src: &[Rep],
    tgt: &[Rep],
    value: &CouponValue,
) -> Result<MatrixS> {
    let cat = e.cat;
    let f = cat.field();
    let n_in: usize = src.iter().map(|r| r.dim).product();
    let n_out: usize = tgt.iter().map(|r| r.dim).product();
    let bad = |msg: &str| Error::Parse(format!("coupon {name}: {msg}"));
    let need_pd = || e.pd.ok_or_else(|| bad("projective data not available"));
    match value {
        CouponValue::Unbound | CouponValue::Mirror(_) => Err(Error::UnboundCoupon(name.to_string())),
        CouponValue::Matrix { rows, cols, entries } => {
            if (*rows, *cols) != (n_out, n_in) {
                return Err(bad(&format!("matrix is {rows}x{cols}, boundary needs {n_out}x{n_in}")));
            }
            let vals: Vec<Scalar> = entries.iter().map(|s| Scalar::parse(f, s)).collect::<std::result::Result<_, _>>()?;
            Ok(MatrixS::from_vec(f, *rows, *cols, vals)?)
        }
        CouponValue::Basis(coeffs) => {
            let (x, y) = (tensor_or_unit(cat, src), tensor_or_unit(cat, tgt));
            let basis = cat.hom_basis(&x, &y);
            if basis.len() != coeffs.len() {
                return Err(bad(&format!("hom space has dimension {}, got {} coefficients", basis.len(), coeffs.len())));
            }
            let mut m = MatrixS::zeros(f, n_out, n_in);
            for (b, c) in basis.iter().zip(coeffs) {
                let c = Scalar::parse(f, c)?;
                if !c.is_zero() {
                    m = m.try_add(&b.matrix.scale(&c))?;
                }
            }
            Ok(m)
        }
        CouponValue::Special(s) => match s.as_str() {
            "id" => {
                if src_pts != tgt_pts {
                    return Err(bad("id needs equal source and target"));
                }
                Ok(MatrixS::identity(f, n_in))
            }
            "zero" => Ok(MatrixS::zeros(f, n_out, n_in)),
            "eta1eps1" => {
                let pd = need_pd()?;
                if src.len() != 1 || tgt.len() != 1 || !src[0].same(&pd.covers[0]) || !tgt[0].same(&pd.covers[0]) {
                    return Err(bad("eta1eps1 lives on P1+"));
                }
                Ok(pd.eta1.matrix.try_mul(&pd.eps1.matrix)?)
            }
            "pi1" => {
                let pd = need_pd()?;
                if src.len() != 1 || !src[0].same(&pd.generator) || !tgt.is_empty() {
                    return Err(bad("pi1 : G+ -> 1"));
                }
                Ok(pd.pi1.matrix.clone())
            }
            "iota1" => {
                let pd = need_pd()?;
                if tgt.len() != 1 || !tgt[0].same(&pd.generator) || !src.is_empty() {
                    return Err(bad("iota1 : 1 -> G+"));
                }
                Ok(pd.iota1.matrix.clone())
            }
            "cointegral" => {
                let ok = src.is_empty()
                    && tgt_pts.len() == 2
                    && tgt_pts[0].label == "H"
                    && tgt_pts[1] == tgt_pts[0].opposite();
                if !ok {
                    return Err(bad("cointegral : 1 -> H± H∓"));
                }
                let n = cat.h.d;
                let unit = &cat.h.unit;
                let mut m = MatrixS::zeros(f, n * n, 1);
                for a in 0..n {
                    for i in 0..n {
                        let c = if tgt_pts[0].positive { &unit[a] * &e.mu_plus[i] } else { &e.lambda[a] * &unit[i] };
                        m.set(a * n + i, 0, c);
                    }
                }
                Ok(m)
            }
            other => Err(bad(&format!("unknown special value {other}"))),
        },
    }
}

/// Resolve a label to a module: builtins (1, H, L, G, Vk, Pk, P(Vk)) or a
/// declared product.
fn resolve_label(cat: &RepCat, pd: Option<&ProjectiveData>, coend: Option<&Rep>, d: &Diagram, name: &str) -> Result<Rep> {
    match name {
        "1" => return Ok(cat.trivial.clone()),
        "H" => return Ok(cat.regular.clone()),
        "L" => {
            return Ok(match coend {
                Some(l) => l.clone(),
                None => cat.coend_object(),
            })
        }
        _ => {}
    }
    if let Some((_, expr)) = d.reps.iter().find(|r| r.0 == name) {
        let factors: Vec<Rep> = expr.split('*').map(|t| resolve_label(cat, pd, coend, d, t.trim())).collect::<Result<_>>()?;
        return Ok(cat.tensor_all(&factors));
    }
    pd.and_then(|pd| pd.lookup(name)).cloned().ok_or_else(|| Error::UnknownLabel(name.to_string()))
}

impl<'a> Engine<'a> {
    fn evaluate(&self, d: &Diagram) -> Result<Evaluation> {
        let f = self.cat.field();
        let ifs = d.interfaces()?;
        // one integral insertion per red component, at its first cup
        let inserts: HashSet<(usize, usize)> = d.red_components()?.iter().filter_map(|c| c.first().copied()).collect();
        let mut run = Run { e: self, d, legs: HashMap::new(), labels: HashMap::new(), ops: HashMap::new() };
        let in_dims: Vec<usize> = d.input.iter().map(|p| run.leg(p).map(|r| r.dim)).collect::<Result<_>>()?;
        let ncols: usize = in_dims.iter().product();
        let mut st = State::identity(f, in_dims);
        for (s, slice) in d.slices.iter().enumerate() {
            let iface = &ifs[s];
            let (mut ip, mut lp) = (0usize, 0usize);
            for (ti, tok) in slice.iter().enumerate() {
                let (op, k, nout) = match tok {
                    Token::Id(_) => (None, 1, 1),
                    Token::Cup(p) => (Some(run.cup(p, inserts.contains(&(s, ti)))?), 0, 2),
                    Token::Cap => (Some(run.cap(&iface[ip])?), 2, 0),
                    Token::Cross(b) => (Some(run.cross(*b, &iface[ip], &iface[ip + 1])?), 2, 2),
                    Token::Twist(b) => (Some(run.twist(*b, &iface[ip])?), 1, 1),
                    Token::Coupon(n) => {
                        let def = d.coupon(n).ok_or_else(|| Error::UnknownLabel(n.clone()))?;
                        let (k, nout) = (def.src.len(), def.tgt.len());
                        (Some(run.coupon(n)?), k, nout)
                    }
                };
                if let Some(op) = op {
                    st.apply(lp, &op);
                }
                ip += k;
                lp += nout;
            }
        }
        let output = ifs.last().cloned().unwrap_or_default();
        Ok(Evaluation { matrix: st.to_matrix(ncols), input: d.input.clone(), output })
    }
}

/// Probe objects of the trace solver.
#[derive(Clone, Debug)]
pub enum Probe {
    Cover(usize),
    Generator,
    /// base ⊗ right, where `base` indexes an earlier probe.
    Product { base: usize, right: Rep },
}

/// Result of solving the modified-trace equations on a probe set.
#[derive(Clone, Debug)]
pub struct TraceSolution {
    pub probes: Vec<(Probe, Rep)>,
    pub spaces: Vec<HomSpace>,
    /// Normalized value of t on the basis of each End(probe).
    pub values: Vec<Vec<Scalar>>,
    /// Dimension of the solution space before normalization.
    pub nullity: usize,
    pub equations: usize,
}

/// Modified trace on all projective objects, from the solved values on covers
/// and on G.
pub struct TraceFamily {
    pub solution: TraceSolution,
    f: &'static Field,
    /// Weight vectors w_X with t_X(f) = Σ w[e]·f[e] over flat entries.
    cache: Mutex<HashMap<String, Arc<Vec<Scalar>>>>,
}

impl std::fmt::Debug for TraceFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TraceFamily({} probes)", self.solution.probes.len())
    }
}

/// ptr_R(f) for f ∈ End(X⊗S): (id⊗ev_right)∘(f⊗id)∘(id⊗coev_left).
pub fn partial_trace_right(cat: &RepCat, x: usize, s: &Rep, m: &MatrixS) -> MatrixS {
    let f = cat.field();
    let n = s.dim;
    let g = cat.act(s, &cat.se.pivot_g);
    let mut out = MatrixS::zeros(f, x, x);
    for a in 0..x {
        for b in 0..x {
            let mut acc = Scalar::zero(f);
            for j in 0..n {
                for (i, gv) in g.row(j) {
                    let v = m.get(a * n + i, b * n + j);
                    if !v.is_zero() {
                        acc += &(v * gv);
                    }
                }
            }
            out.set(a, b, acc);
        }
    }
    out
}

fn coord_row(space: &HomSpace, m: &MatrixS, what: &str) -> Result<Vec<Scalar>> {
    space.coords(m).ok_or_else(|| Error::NotIntertwiner(format!("{what} left its hom space")))
}

/// Solve cyclicity (against G) and partial-trace equations on the probe set.
pub fn solve_modified_trace(cat: &RepCat, pd: &ProjectiveData, extra: &[Probe]) -> Result<TraceSolution> {
    let f = cat.field();
    let mut probes: Vec<(Probe, Rep)> = Vec::new();
    for (k, p) in pd.covers.iter().enumerate() {
        probes.push((Probe::Cover(k), p.clone()));
    }
    let gi = probes.len();
    probes.push((Probe::Generator, pd.generator.clone()));
    for k in 0..pd.covers.len() {
        for s in pd.simples.iter().skip(1) {
            let x = cat.tensor(&pd.covers[k], s);
            probes.push((Probe::Product { base: k, right: s.clone() }, x));
        }
    }
    for p in extra {
        let x = match p {
            Probe::Cover(k) => pd.covers[*k].clone(),
            Probe::Generator => pd.generator.clone(),
            Probe::Product { base, right } => cat.tensor(&probes[*base].1, right),
        };
        probes.push((p.clone(), x));
    }
    let spaces: Vec<HomSpace> = probes.iter().map(|(_, x)| HomSpace::new(cat.hom_basis(x, x), f)).collect::<Result<_>>()?;
    let mut offs = Vec::new();
    let mut total = 0;
    for s in &spaces {
        offs.push(total);
        total += s.dim();
    }
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    let mut push = |parts: Vec<(usize, Vec<Scalar>, bool)>| {
        let mut r = vec![Scalar::zero(f); total];
        for (p, c, plus) in parts {
            for (b, v) in c.into_iter().enumerate() {
                if plus {
                    r[offs[p] + b] += &v;
                } else {
                    r[offs[p] + b] -= &v;
                }
            }
        }
        if r.iter().any(|x| !x.is_zero()) {
            rows.push(r);
        }
    };
    // cyclicity: t_X(β∘α) = t_G(α∘β), α: X → G, β: G → X
    let g = &pd.generator;
    for (p, (_, x)) in probes.iter().enumerate() {
        let to_g = cat.hom_basis(x, g);
        let from_g = cat.hom_basis(g, x);
        for a in &to_g {
            for b in &from_g {
                let ba = b.matrix.try_mul(&a.matrix)?;
                let ab = a.matrix.try_mul(&b.matrix)?;
                push(vec![(p, coord_row(&spaces[p], &ba, "β∘α")?, true), (gi, coord_row(&spaces[gi], &ab, "α∘β")?, false)]);
            }
        }
    }
    // partial trace: t_{X⊗S}(h) = t_X(ptr h)
    for (p, (probe, _)) in probes.iter().enumerate() {
        if let Probe::Product { base, right } = probe {
            let bdim = probes[*base].1.dim;
            for h in &spaces[p].basis {
                let pt = partial_trace_right(cat, bdim, right, &h.matrix);
                push(vec![(p, coord_row(&spaces[p], &h.matrix, "basis")?, true), (*base, coord_row(&spaces[*base], &pt, "partial trace")?, false)]);
            }
        }
    }
    let equations = rows.len();
    let a = MatrixS::from_fn(f, rows.len(), total, |i, j| rows[i][j].clone());
    let ns = if rows.is_empty() { MatrixS::identity(f, total) } else { a.nullspace() };
    if ns.cols() != 1 {
        return Err(Error::NonUniqueTrace(ns.cols()));
    }
    let sol = ns.col(0);
    // t_{P_1}(η_1∘ε_1) = 1
    let e1 = pd.eta1.matrix.try_mul(&pd.eps1.matrix)?;
    let c = coord_row(&spaces[0], &e1, "η₁∘ε₁")?;
    let norm = dot(&c, &sol[offs[0]..offs[0] + spaces[0].dim()]);
    let inv = norm.inv().map_err(|_| Error::NoSolution("modified trace vanishes on η₁∘ε₁".into()))?;
    let values = spaces.iter().enumerate().map(|(p, s)| sol[offs[p]..offs[p] + s.dim()].iter().map(|v| v * &inv).collect()).collect();
    Ok(TraceSolution { probes, spaces, values, nullity: ns.cols(), equations })
}

/// Closed form on a module with a free model ⊕ H·e_k: t(f) = Σ_k λ(g·f_kk(e_k)).
pub fn trace_oracle(cat: &RepCat, x: &Rep, m: &MatrixS) -> Result<Scalar> {
    let f = cat.field();
    let free = x.free_model().ok_or_else(|| Error::NotProjective(format!("{} has no free model", x.name)))?;
    let (_, mu) = insertion_functionals(cat);
    let mut off = 0;
    let mut acc = Scalar::zero(f);
    for s in free {
        let r = s.basis.cols();
        let (ce, _) = s
            .basis
            .solve(&MatrixS::column(f, s.idempotent.clone()))?
            .ok_or_else(|| Error::NoSolution("idempotent outside its summand".into()))?;
        let block = MatrixS::from_fn(f, r, r, |i, j| m.get(off + i, off + j).clone());
        let fe = s.basis.try_mul(&block.try_mul(&ce)?)?;
        acc += &dot(&mu, &fe.col(0));
        off += r;
    }
    Ok(acc)
}

fn apply_weights(w: &[Scalar], m: &MatrixS) -> Scalar {
    dot(w, m.entries())
}

impl TraceFamily {
    fn new(solution: TraceSolution, f: &'static Field) -> TraceFamily {
        TraceFamily { solution, f, cache: Mutex::new(HashMap::new()) }
    }

    fn probe_weights(&self, p: usize) -> Vec<Scalar> {
        let x = &self.solution.probes[p].1;
        self.solution.spaces[p].weights(&self.solution.values[p], x.dim * x.dim, self.f)
    }

    /// Weight vector of t_X for any projective X.
    pub fn weights(&self, cat: &RepCat, pd: &ProjectiveData, x: &Rep) -> Result<Arc<Vec<Scalar>>> {
        if let Some(w) = self.cache.lock().expect("trace cache").get(&x.name) {
            if w.len() == x.dim * x.dim {
                return Ok(w.clone());
            }
        }
        let f = cat.field();
        let w = if let Some(p) = self.solution.probes.iter().position(|(pr, r)| matches!(pr, Probe::Cover(_) | Probe::Generator) && r.same(x) && r.dim == x.dim) {
            self.probe_weights(p)
        } else {
            let g = &pd.generator;
            let gi = self.solution.probes.iter().position(|(pr, _)| matches!(pr, Probe::Generator)).expect("G probe");
            let wg = self.probe_weights(gi);
            let wgm = MatrixS::from_vec(f, g.dim, g.dim, wg)?;
            let fac = cat.factor_through(x, g)?.ok_or_else(|| Error::NotProjective(x.name.clone()))?;
            // t_X(h) = Σ c t_G(β h α) = tr((Σ c α W_Gᵀ β) h): weights are the transpose
            let mut acc = MatrixS::zeros(f, x.dim, x.dim);
            let wgt = wgm.transpose();
            for (alpha, beta, c) in &fac {
                let term = alpha.matrix.try_mul(&wgt)?.try_mul(&beta.matrix)?;
                acc = acc.try_add(&term.scale(c))?;
            }
            acc.transpose().entries().to_vec()
        };
        let w = Arc::new(w);
        self.cache.lock().expect("trace cache").insert(x.name.clone(), w.clone());
        Ok(w)
    }
}

/// A validated backend together with its stabilization data, projective
/// data and modified trace.
pub struct Session {
    pub cat: RepCat,
    pub pd: ProjectiveData,
    pub stab: StabData,
    pub trace: TraceFamily,
    pub coend: Rep,
    mu_plus: Vec<Scalar>,
    lambda: Vec<Scalar>,
    projective: Mutex<HashMap<String, bool>>,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Session({})", self.cat.h.name)
    }
}

fn constants(h: &HopfPresentation, dp0: &Scalar, dm0: &Scalar) -> Result<(Scalar, Scalar, Scalar)> {
    let f = h.f;
    // returns (scale c of λ, D, δ)
    match (&h.d_scalar, &h.delta) {
        (Some(d), Some(delta)) => {
            let c = (d * delta).div(dp0)?;
            Ok((c, d.clone(), delta.clone()))
        }
        (Some(d), None) => Ok((Scalar::one(f), d.clone(), dp0.div(d)?)),
        (None, _) => {
            let prod = dp0 * dm0;
            let p = Poly::new(f, vec![-&prod, Scalar::zero(f), Scalar::one(f)]);
            let roots = roots_in_field(&p);
            let d = roots.into_iter().next().ok_or_else(|| Error::RootNotInField(prod.to_string()))?;
            let delta = dp0.div(&d)?;
            Ok((Scalar::one(f), d, delta))
        }
    }
}

impl Session {
    pub fn new(h: HopfPresentation) -> Result<Session> {
        Session::with_probes(h, &[])
    }

    /// Build a session; `extra` enlarges the probe set of the trace solver.
    pub fn with_probes(h: HopfPresentation, extra: &[Probe]) -> Result<Session> {
        let cat0 = RepCat::new(h)?;
        if !cat0.h.factorizability_check() {
            return Err(Error::NotFactorizable);
        }
        let (lam0, mu0) = insertion_functionals(&cat0);
        let eng = Engine { cat: &cat0, pd: None, coend: None, mu_plus: mu0, lambda: lam0.clone() };
        let dp0 = eng.evaluate(&Diagram::parse(O_PLUS)?)?.scalar();
        let dm0 = eng.evaluate(&Diagram::parse(O_MINUS)?)?.scalar();
        if dp0.is_zero() || dm0.is_zero() {
            return Err(Error::ZeroStabilization);
        }
        let (c, d, delta) = constants(&cat0.h, &dp0, &dm0)?;
        let dp = &dp0 * &c;
        let dm = &dm0 * &c;
        if &d * &d != &dp * &dm {
            return Err(Error::BadConstants(format!("D^2 = {} but Delta+ Delta- = {}", &d * &d, &dp * &dm)));
        }
        if &delta * &dm != d || &d * &delta != dp {
            return Err(Error::BadConstants(format!("delta = {delta} does not satisfy delta Delta- = D = Delta+/delta")));
        }
        let mut se = cat0.se.clone();
        let lam: Elt = lam0.iter().map(|x| x * &c).collect();
        let big = dot(&lam, &se.left_integral);
        let big_inv = big.inv().map_err(|_| Error::NoSolution("λ(Λ_H) = 0".into()))?;
        se.left_integral = se.left_integral.iter().map(|x| x * &big_inv).collect();
        se.right_cointegral = lam;
        let cat = cat0.with_structure(se);
        let pd = cat.projective_data()?;
        let solution = solve_modified_trace(&cat, &pd, extra)?;
        let (lambda, mu_plus) = insertion_functionals(&cat);
        let coend = cat.coend_object();
        let zeta = &d * &d;
        Ok(Session {
            stab: StabData { delta_plus: dp, delta_minus: dm, d, delta, zeta },
            trace: TraceFamily::new(solution, cat.field()),
            cat,
            pd,
            coend,
            mu_plus,
            lambda,
            projective: Mutex::new(HashMap::new()),
        })
    }

    pub fn field(&self) -> &'static Field {
        self.cat.field()
    }

    fn engine(&self) -> Engine<'_> {
        Engine { cat: &self.cat, pd: Some(&self.pd), coend: Some(&self.coend), mu_plus: self.mu_plus.clone(), lambda: self.lambda.clone() }
    }

    pub fn stab_coeffs(&self) -> &StabData {
        &self.stab
    }

    /// The right cointegral λ in the normalization used by red strands.
    pub fn cointegral(&self) -> &[Scalar] {
        &self.lambda
    }

    /// F_Λ: evaluate a bichrome diagram.
    pub fn lrt_evaluate(&self, d: &Diagram) -> Result<Evaluation> {
        self.engine().evaluate(d)
    }

    /// F_C: evaluate a blue diagram.
    pub fn rt_evaluate(&self, d: &Diagram) -> Result<Evaluation> {
        if d.interfaces()?.iter().flatten().any(|p| p.color == Color::Red) {
            return Err(Error::Usage("rt_evaluate takes blue diagrams; use lrt_evaluate".into()));
        }
        self.engine().evaluate(d)
    }

    /// Value of a closed diagram under F_Λ.
    pub fn closed_value(&self, d: &Diagram) -> Result<Scalar> {
        if !d.is_closed()? {
            return Err(Error::NotClosed);
        }
        Ok(self.lrt_evaluate(d)?.scalar())
    }

    pub fn resolve(&self, d: &Diagram, label: &str) -> Result<Rep> {
        resolve_label(&self.cat, Some(&self.pd), Some(&self.coend), d, label)
    }

    /// Rep of an oriented boundary point.
    pub fn point_rep(&self, d: &Diagram, p: &Point) -> Result<Rep> {
        let base = match p.color {
            Color::Red => self.cat.regular.clone(),
            Color::Blue => self.resolve(d, &p.label)?,
        };
        Ok(if p.positive { base } else { self.cat.dual(&base) })
    }

    pub fn is_projective_rep(&self, x: &Rep) -> Result<bool> {
        if let Some(b) = self.projective.lock().expect("projectivity cache").get(&x.name) {
            return Ok(*b);
        }
        let b = self.cat.is_projective(x, &self.pd)?;
        self.projective.lock().expect("projectivity cache").insert(x.name.clone(), b);
        Ok(b)
    }

    /// Projectivity of a label in the context of a diagram's declarations.
    pub fn label_is_projective(&self, d: &Diagram, label: &str) -> bool {
        self.resolve(d, label).and_then(|x| self.is_projective_rep(&x)).unwrap_or(false)
    }

    pub fn is_admissible(&self, d: &Diagram) -> Result<bool> {
        d.is_admissible(&|l| self.label_is_projective(d, l))
    }

    /// t_X(f) for a projective X.
    pub fn trace(&self, x: &Rep, m: &MatrixS) -> Result<Scalar> {
        if m.shape() != (x.dim, x.dim) {
            return Err(Error::InterfaceMismatch { slice: 0, msg: format!("trace of a {:?} matrix on {}", m.shape(), x.name) });
        }
        let w = self.trace.weights(&self.cat, &self.pd, x)?;
        Ok(apply_weights(&w, m))
    }

    /// Indices of blue edges with projective labels.
    pub fn projective_edges(&self, d: &Diagram) -> Result<Vec<usize>> {
        Ok(d.edges()?
            .iter()
            .filter(|e| e.color == Color::Blue && self.label_is_projective(d, &e.label))
            .map(|e| e.id)
            .collect())
    }

    /// F'_Λ(T) = t_V(F_Λ(T_V)), cut at the first projective blue edge.
    pub fn renormalized_evaluate(&self, d: &Diagram) -> Result<Scalar> {
        let edges = self.projective_edges(d)?;
        let &e = edges.first().ok_or_else(|| Error::NotAdmissible(String::new()))?;
        self.renormalized_at(d, e)
    }

    /// F'_Λ cut at a given edge.
    pub fn renormalized_at(&self, d: &Diagram, edge: usize) -> Result<Scalar> {
        let cut = d.cutting_presentation(edge, &|l| self.label_is_projective(d, l))?;
        self.renormalized_cut(&cut)
    }

    /// t applied to the evaluation of a (1,1) diagram with equal ends.
    pub fn renormalized_cut(&self, cut: &Diagram) -> Result<Scalar> {
        let ev = self.lrt_evaluate(cut)?;
        if ev.input.len() != 1 || ev.output != ev.input {
            return Err(Error::InterfaceMismatch { slice: 0, msg: "cut diagram must have one matching end".into() });
        }
        let x = self.point_rep(cut, &ev.input[0])?;
        self.trace(&x, &ev.matrix)
    }

    pub fn evaluation_to_mor(&self, d: &Diagram, ev: &Evaluation) -> Result<MorRep> {
        let src: Vec<Rep> = ev.input.iter().map(|p| self.point_rep(d, p)).collect::<Result<_>>()?;
        let tgt: Vec<Rep> = ev.output.iter().map(|p| self.point_rep(d, p)).collect::<Result<_>>()?;
        Ok(MorRep::new(&tensor_or_unit(&self.cat, &src), &tensor_or_unit(&self.cat, &tgt), ev.matrix.clone()))
    }

    /// Weight of the trace solution against the closed form on covers and G:
    /// returns the first mismatch, if any.
    pub fn oracle_mismatch(&self) -> Result<Option<String>> {
        let sol = &self.trace.solution;
        for (p, (probe, x)) in sol.probes.iter().enumerate() {
            if !matches!(probe, Probe::Cover(_) | Probe::Generator) {
                continue;
            }
            for (b, h) in sol.spaces[p].basis.iter().enumerate() {
                let want = trace_oracle(&self.cat, x, &h.matrix)?;
                if want != sol.values[p][b] {
                    return Ok(Some(format!("{} basis {b}: solver {} oracle {}", x.name, sol.values[p][b], want)));
                }
            }
        }
        Ok(None)
    }

    /// Check t_{X⊗Y}(f) = t_X(ptr f) on `n` random instances with X a cover
    /// and Y a simple or a cover; returns the failures.
    pub fn check_partial_traces(&self, n: usize, seed: u64) -> Result<Vec<String>> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f = self.field();
        let ys: Vec<&Rep> = self.pd.simples.iter().chain(self.pd.covers.iter()).collect();
        let mut bad = Vec::new();
        let mut tensors: HashMap<(usize, usize), (Rep, Vec<MorRep>)> = HashMap::new();
        for _ in 0..n {
            let i = rng.gen_range(0..self.pd.covers.len());
            let j = rng.gen_range(0..ys.len());
            let (xy, basis) = tensors
                .entry((i, j))
                .or_insert_with(|| {
                    let xy = self.cat.tensor(&self.pd.covers[i], ys[j]);
                    let b = self.cat.hom_basis(&xy, &xy);
                    (xy, b)
                })
                .clone();
            let mut m = MatrixS::zeros(f, xy.dim, xy.dim);
            for b in &basis {
                let c = Scalar::from_int(f, rng.gen_range(-3..=3));
                m = m.try_add(&b.matrix.scale(&c))?;
            }
            let lhs = self.trace(&xy, &m)?;
            let x = &self.pd.covers[i];
            let rhs = self.trace(x, &partial_trace_right(&self.cat, x.dim, ys[j], &m))?;
            if lhs != rhs {
                bad.push(format!("{}⊗{}: {} vs {}", x.name, ys[j].name, lhs, rhs));
            }
        }
        Ok(bad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends;

    fn closed(s: &Session, t: &str) -> Scalar {
        s.closed_value(&Diagram::parse(t).unwrap()).unwrap()
    }

    #[test]
    fn abelian_constants() {
        let s = Session::new(backends::abelian_modular()).unwrap();
        let st = s.stab_coeffs();
        assert_eq!(&st.d * &st.d, &st.delta_plus * &st.delta_minus);
        assert_eq!(&st.d * &st.delta, st.delta_plus);
        // blue unknot labeled by the trivial module has dimension 1
        assert!(closed(&s, "cup(V1+)\ncap\n").is_one());
        assert!(s.oracle_mismatch().unwrap().is_none());
    }

    #[test]
    fn uq_trace_and_vanishing() {
        let s = Session::new(backends::uqsl2()).unwrap();
        assert_eq!(s.trace.solution.nullity, 1);
        assert!(s.oracle_mismatch().unwrap().is_none());
        // 0-framed red unknot vanishes on the non-semisimple backend
        assert!(closed(&s, "red:cup(+)\ncap\n").is_zero());
        let cut = Diagram::parse("coupon n : P1+ -> P1+ = eta1eps1\nin: P1+\ncoupon(n)\n").unwrap();
        assert!(s.renormalized_cut(&cut).unwrap().is_one());
    }

    fn hopf_link(a: i32, b: i32) -> String {
        let mut t = String::from("red:cup(+) red:cup(+)\nred:id(+) x+ red:id(-)\nred:id(+) x+ red:id(-)\n");
        for _ in 0..a.abs() {
            t.push_str(if a > 0 { "tw+ red:id(-) red:id(+) red:id(-)\n" } else { "tw- red:id(-) red:id(+) red:id(-)\n" });
        }
        for _ in 0..b.abs() {
            t.push_str(if b > 0 { "red:id(+) red:id(-) tw+ red:id(-)\n" } else { "red:id(+) red:id(-) tw- red:id(-)\n" });
        }
        t.push_str("cap cap\n");
        t
    }

    #[test]
    fn hopf_links_on_uq() {
        let s = Session::new(backends::uqsl2()).unwrap();
        let st = s.stab_coeffs().clone();
        assert_eq!(closed(&s, &hopf_link(0, 0)), st.zeta);
        assert_eq!(closed(&s, &hopf_link(2, 1)), &st.delta_plus * &st.delta_plus);
        assert_eq!(closed(&s, &hopf_link(-2, -1)), &st.delta_minus * &st.delta_minus);
        assert!(closed(&s, &hopf_link(1, 1)).is_zero());
        // base point of the insertion does not matter
        let other = "red:cup(-)\nred:id(-) tw+\ncap\n";
        assert_eq!(closed(&s, other), st.delta_plus);
    }

    #[test]
    fn trace_checks_on_uq() {
        let s = Session::new(backends::uqsl2()).unwrap();
        assert!(s.check_partial_traces(20, 7).unwrap().is_empty());
        // enlarging the probe set does not change the solution
        let simples = s.pd.simples.clone();
        let covers = s.pd.covers.len();
        let base = covers + 1; // P1⊗V2
        let extra = vec![Probe::Product { base, right: simples[1].clone() }];
        let big = Session::with_probes(backends::uqsl2(), &extra).unwrap();
        for p in 0..=covers {
            assert_eq!(big.trace.solution.values[p], s.trace.solution.values[p]);
        }
    }

    #[test]
    fn meridian_lemma() {
        for h in [backends::abelian_modular(), backends::uqsl2()] {
            let s = Session::new(h).unwrap();
            let n = s.cat.hom_dim(&s.pd.generator, &s.pd.generator);
            let coeffs: Vec<String> = (0..n).map(|i| ((i * 7 + 3) % 5).to_string()).collect();
            let head = format!("coupon f : G+ -> G+ = basis({})\n", coeffs.join(", "));
            let t1 = format!("{head}cup(G+)\nred:cup(+) id(G+) id(G-)\nred:id(+) x+ id(G-)\nred:id(+) x+ id(G-)\ncap id(G+) id(G-)\ncoupon(f) id(G-)\ncap\n");
            let t2 = format!("{head}coupon p : G+ -> 1 = pi1\ncoupon i : 1 -> G+ = iota1\ncup(G+)\ncoupon(f) id(G-)\ncoupon(p) id(G-)\ncoupon(i) id(G-)\ncap\n");
            let a = s.renormalized_evaluate(&Diagram::parse(&t1).unwrap()).unwrap();
            let b = s.renormalized_evaluate(&Diagram::parse(&t2).unwrap()).unwrap();
            assert_eq!(a, &s.stab.zeta * &b);
        }
    }

    #[test]
    fn cuts_agree() {
        let s = Session::new(backends::uqsl2()).unwrap();
        let t = "coupon a : P2+ -> G+ = basis(1, 2, 0, 1)\ncoupon b : G+ -> P2+ = basis(1, -1, 3, 1)\ncup(P2+)\ncoupon(a) id(P2-)\ncoupon(b) id(P2-)\ncap\n";
        let d = Diagram::parse(t).unwrap();
        let edges = s.projective_edges(&d).unwrap();
        assert_eq!(edges.len(), 2);
        let vals: Vec<Scalar> = edges.iter().map(|&e| s.renormalized_at(&d, e).unwrap()).collect();
        assert_eq!(vals[0], vals[1]);
        assert!(!vals[0].is_zero());
    }
}
