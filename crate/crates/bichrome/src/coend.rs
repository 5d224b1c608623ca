//! The coend L = ∫ X*⊗X, realized on H* with the coadjoint action.
//!
//! Structure maps are i_X(f⊗x) = (h ↦ f(hx)). Since i_H(φ⊗1) = φ, every
//! morphism out of L is pinned down by its value on the regular module, and
//! the product, coproduct and monodromy below are derived that way.
//!
//! The projective coend L⊗V lives inside G*⊗G⊗V as the image of ℓ_V. Its
//! section Φ_V : L⊗V → G*⊗G⊗V satisfies (i_G⊗id)∘Φ_V = id, which is the
//! exact certificate used for idempotency on large backends.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagrams::{CouponValue, Diagram};
use crate::error::{Error, Result};
use crate::eval::Session;
use crate::repcat::{MorRep, RepCat, Rep};
use crate::sparse::SpMat;
use cyclo::{MatrixS, Scalar};

/// Outcome of one named identity.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

/// i_X : X*⊗X → L.
pub fn structure_map(cat: &RepCat, x: &Rep) -> SpMat {
    let n = x.dim;
    let rows = (0..cat.h.d).map(|i| x.basis_action(i)).map(|m| {
        let mut r = Vec::new();
        for a in 0..n {
            for (b, v) in m.row(a) {
                r.push((a * n + b, v.clone()));
            }
        }
        r
    });
    SpMat::from_rows(cat.field(), cat.h.d, n * n, rows.collect())
}

fn random_scalar(rng: &mut ChaCha8Rng, f: &'static cyclo::Field) -> Scalar {
    let mut s = Scalar::from_int(f, rng.gen_range(-3..=3));
    if rng.gen_bool(0.5) {
        s += &(&Scalar::root_of_unity(f, rng.gen_range(1..f.order() as i64)) * &Scalar::from_int(f, rng.gen_range(-2..=2)));
    }
    s
}

/// A random element of C(X, Y) (zero when the hom space is).
pub fn random_morphism(cat: &RepCat, x: &Rep, y: &Rep, rng: &mut ChaCha8Rng) -> MorRep {
    let f = cat.field();
    let mut m = MatrixS::zeros(f, y.dim, x.dim);
    for b in cat.hom_basis(x, y) {
        m = &m + &b.matrix.scale(&random_scalar(rng, f));
    }
    MorRep::new(x, y, m)
}

fn column(f: &'static cyclo::Field, v: &[Scalar]) -> SpMat {
    SpMat::from_dense(&MatrixS::column(f, v.to_vec()))
}

fn row(f: &'static cyclo::Field, v: &[Scalar]) -> SpMat {
    SpMat::from_dense(&MatrixS::column(f, v.to_vec()).transpose())
}

/// The coend with its Hopf structure, integral, monodromy and S-transformation.
#[derive(Clone, Debug)]
pub struct CoendData {
    pub l: Rep,
    /// μ_L : L⊗L → L
    pub mu: SpMat,
    /// η_L = i_1, the counit of H as a functional
    pub eta: Vec<Scalar>,
    /// Δ_L : L → L⊗L
    pub delta: SpMat,
    /// ε_L(φ) = φ(1)
    pub eps: Vec<Scalar>,
    /// Λ_L : 1 → L, normalized to agree with the red-strand insertion
    pub integral: Vec<Scalar>,
    /// Dimension of the space of two-sided integrals before normalization.
    pub integral_nullity: usize,
    pub omega: SpMat,
    pub omega_inv: SpMat,
    /// S = (ε⊗id)∘Ω∘(id⊗Λ)
    pub s: MatrixS,
    /// S' = (id⊗ε)∘Ω⁻¹∘(Λ⊗id); S∘S' = ζ·id
    pub s_prime: MatrixS,
    pub zeta: Scalar,
    pub d_scalar: Scalar,
}

impl CoendData {
    pub fn build(sess: &Session) -> Result<CoendData> {
        let cat = &sess.cat;
        let h = &*cat.h;
        let f = h.f;
        let d = h.d;
        let l = sess.coend.clone();
        let hd = cat.dual(&cat.regular);

        // (φ⋆ψ)(h) = Σ φ(h₁)ψ(h₂)
        let conv = SpMat::from_rows(
            f,
            d,
            d * d,
            (0..d).map(|k| h.coproduct_basis(k).iter().map(|(a, b, c)| (a * d + b, c.clone())).collect()).collect(),
        );
        // μ_L(φ⊗ψ) = Σ (R₁▷φ) ⋆ (R₂·ψ)
        let mut pre = SpMat::zeros(f, d * d, d * d);
        for (a, b, c) in &h.r {
            pre = pre.add_scaled(&l.basis_action(*a).kron(&hd.basis_action(*b)), c);
        }
        let mu = conv.mul(&pre);
        let eta = h.counit.clone();
        let eps = h.unit.clone();
        // Δ_L(φ)[i,k] = φ(e_i e_k)
        let delta = SpMat::from_rows(
            f,
            d * d,
            d,
            (0..d * d).map(|ik| h.mul_basis(ik / d, ik % d).to_vec()).collect(),
        );

        // two-sided integral: μ(Λ⊗φ) = φ(1)Λ = μ(φ⊗Λ)
        let mut eqs = MatrixS::zeros(f, 2 * d * d, d);
        for j in 0..d {
            for hh in 0..d {
                for a in 0..d {
                    let mut left = mu.get(hh, a * d + j);
                    let mut right = mu.get(hh, j * d + a);
                    if a == hh {
                        left -= &eps[j];
                        right -= &eps[j];
                    }
                    eqs.set(j * d + hh, a, left);
                    eqs.set(d * d + j * d + hh, a, right);
                }
            }
        }
        let ns = eqs.nullspace();
        let integral_nullity = ns.cols();
        if integral_nullity != 1 {
            return Err(Error::NotOneDimensional { what: "coend integral".into(), dim: integral_nullity });
        }
        let raw = ns.col(0);
        let lam = sess.cointegral();
        let k = (0..d).find(|&i| !raw[i].is_zero()).expect("nonzero nullspace vector");
        let scale = lam[k].div(&raw[k])?;
        let integral: Vec<Scalar> = raw.iter().map(|x| x * &scale).collect();
        if integral != lam {
            return Err(Error::NoSolution("coend integral is not proportional to the cointegral".into()));
        }

        let omega = monodromy(cat, &h.monodromy_element());
        let omega_inv = monodromy(cat, &h.monodromy_inverse());
        let lam_col = column(f, &integral);
        let eps_row = row(f, &eps);
        let id = SpMat::identity(f, d);
        let s = eps_row.kron(&id).mul(&omega).mul(&id.kron(&lam_col)).to_dense();
        let s_prime = id.kron(&eps_row).mul(&omega_inv).mul(&lam_col.kron(&id)).to_dense();
        if s.rank() != d {
            return Err(Error::SNotInvertible);
        }
        Ok(CoendData {
            l,
            mu,
            eta,
            delta,
            eps,
            integral,
            integral_nullity,
            omega,
            omega_inv,
            s,
            s_prime,
            zeta: sess.stab.zeta.clone(),
            d_scalar: sess.stab.d.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.l.dim
    }

    /// S and its inverse for the integral rescaled by D⁻¹, where the inverse
    /// formula (id⊗ε)∘Ω⁻¹∘(Λ⊗id) holds on the nose.
    pub fn s_pair_unit(&self) -> Result<(MatrixS, MatrixS)> {
        let dinv = self.d_scalar.inv()?;
        Ok((self.s.scale(&dinv), self.s_prime.scale(&dinv)))
    }

    /// S_L, solved as the convolution inverse of id_L. Dense d²×d² system,
    /// so only sensible on small backends.
    pub fn antipode(&self) -> Result<MatrixS> {
        let f = self.l.basis_action(0).field();
        let d = self.dim();
        // μ(S⊗id)Δ(e_m) = Σ_{i,k} Δ[(i,k),m] Σ_a S[a,i] μ[:, (a,k)]
        let mut eqs = MatrixS::zeros(f, d * d, d * d);
        let mut rhs = MatrixS::zeros(f, d * d, 1);
        for m in 0..d {
            for hh in 0..d {
                rhs.set(m * d + hh, 0, &self.eta[hh] * &self.eps[m]);
            }
        }
        for ik in 0..d * d {
            let (i, k) = (ik / d, ik % d);
            for m in 0..d {
                let c = self.delta.get(ik, m);
                if c.is_zero() {
                    continue;
                }
                for a in 0..d {
                    for hh in 0..d {
                        let v = self.mu.get(hh, a * d + k);
                        if v.is_zero() {
                            continue;
                        }
                        let cur = eqs.get(m * d + hh, a * d + i) + &(&c * &v);
                        eqs.set(m * d + hh, a * d + i, cur);
                    }
                }
            }
        }
        let (x, _) = eqs.solve(&rhs)?.ok_or_else(|| Error::NoSolution("braided antipode".into()))?;
        Ok(MatrixS::from_fn(f, d, d, |a, i| x.get(a * d + i, 0).clone()))
    }

    /// i_X(f*⊗id_X) = i_Y(id_{Y*}⊗f) for f : X → Y.
    pub fn dinatural(&self, cat: &RepCat, g: &MorRep) -> bool {
        let fld = cat.field();
        let (x, y) = (&g.source, &g.target);
        let gt = SpMat::from_dense(&g.matrix.transpose());
        let lhs = structure_map(cat, x).mul(&gt.kron(&SpMat::identity(fld, x.dim)));
        let rhs = structure_map(cat, y).mul(&SpMat::identity(fld, y.dim).kron(&SpMat::from_dense(&g.matrix)));
        lhs == rhs
    }

    /// μ_L∘(i_X⊗i_Y) = i_{X⊗Y}∘(c_{X*⊗X, Y*}⊗id_Y), reading (X⊗Y)* as Y*⊗X*.
    pub fn product_defined(&self, cat: &RepCat, x: &Rep, y: &Rep) -> bool {
        let f = cat.field();
        let (n, m) = (x.dim, y.dim);
        let lhs = self.mu.mul(&structure_map(cat, x).kron(&structure_map(cat, y)));
        let xdx = cat.tensor(&cat.dual(x), x);
        let yd = cat.dual(y);
        let c = cat.braiding_sp(&xdx, &yd).kron(&SpMat::identity(f, m));
        // i_{X⊗Y} on Y*⊗X*⊗X⊗Y: (g⊗f⊗x⊗y) ↦ (h ↦ Σ f(h₁x) g(h₂y))
        let h = &*cat.h;
        let rows = (0..h.d)
            .map(|k| {
                let mut r = Vec::new();
                for (a, b, c) in h.coproduct_basis(k) {
                    let (xa, yb) = (&x.basis_action(*a), &y.basis_action(*b));
                    for fi in 0..n {
                        for (xi, u) in xa.row(fi) {
                            for gi in 0..m {
                                for (yi, w) in yb.row(gi) {
                                    let col = ((gi * n + fi) * n + xi) * m + yi;
                                    r.push((col, &(c * u) * w));
                                }
                            }
                        }
                    }
                }
                r
            })
            .collect();
        let ixy = SpMat::from_rows(f, h.d, m * n * n * m, rows);
        lhs == ixy.mul(&c)
    }

    /// Ω∘(i_X⊗i_Y) = (i_X⊗i_Y)∘(id⊗c_{Y*,X}c_{X,Y*}⊗id).
    pub fn omega_defined(&self, cat: &RepCat, x: &Rep, y: &Rep) -> bool {
        let f = cat.field();
        let ii = structure_map(cat, x).kron(&structure_map(cat, y));
        let yd = cat.dual(y);
        let dbl = cat.braiding_sp(&yd, x).mul(&cat.braiding_sp(x, &yd));
        let mid = SpMat::identity(f, x.dim).kron(&dbl).kron(&SpMat::identity(f, y.dim));
        self.omega.mul(&ii) == ii.mul(&mid)
    }

    /// μ_L(Λ⊗φ) = ε(φ)Λ = μ_L(φ⊗Λ), and Λ is invariant.
    pub fn integral_law(&self, cat: &RepCat) -> bool {
        let f = cat.field();
        let d = self.dim();
        let lam = column(f, &self.integral);
        let id = SpMat::identity(f, d);
        let target = lam.mul(&row(f, &self.eps));
        let invariant = cat.is_intertwiner(&cat.trivial, &self.l, &lam.to_dense());
        invariant && self.mu.mul(&lam.kron(&id)) == target && self.mu.mul(&id.kron(&lam)) == target
    }

    /// μ_L∘(Λ⊗i_X) = Λ∘ε_L∘i_X = Λ∘ev_X on a probe.
    pub fn absorbs(&self, cat: &RepCat, x: &Rep) -> bool {
        let f = cat.field();
        let lam = column(f, &self.integral);
        let ix = structure_map(cat, x);
        let lhs = self.mu.mul(&lam.kron(&ix));
        let ev = SpMat::from_dense(&cat.ev_left(x).matrix);
        lhs == lam.mul(&ev) && lhs == lam.mul(&row(f, &self.eps).mul(&ix))
    }

    /// Associativity and unit of μ_L on random triples.
    pub fn algebra_samples(&self, n: usize, seed: u64) -> bool {
        let f = self.l.basis_action(0).field();
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mult = |a: &[Scalar], b: &[Scalar]| -> Vec<Scalar> {
            let ab: Vec<Scalar> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
            self.mu.apply(&ab)
        };
        (0..n).all(|_| {
            let mut v = || (0..d).map(|_| random_scalar(&mut rng, f)).collect::<Vec<_>>();
            let (a, b, c) = (v(), v(), v());
            mult(&mult(&a, &b), &c) == mult(&a, &mult(&b, &c)) && mult(&self.eta, &a) == a && mult(&a, &self.eta) == a
        })
    }

    /// The identities checked when the coend is built, plus samples.
    pub fn checks(&self, sess: &Session, seed: u64) -> Vec<Check> {
        let cat = &sess.cat;
        let pd = &sess.pd;
        let f = cat.field();
        let d = self.dim();
        let mut out = Vec::new();
        out.push(Check::new("dim L = dim H", d == cat.h.d, format!("{d}")));
        out.push(Check::new("L is a module", cat.check_rep(&self.l), ""));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let objs: Vec<Rep> = pd.simples.iter().chain(&pd.covers).cloned().collect();
        let mut bad = Vec::new();
        for t in 0..10 {
            let x = &objs[rng.gen_range(0..objs.len())];
            let y = &objs[rng.gen_range(0..objs.len())];
            let g = random_morphism(cat, x, y, &mut rng);
            if !self.dinatural(cat, &g) {
                bad.push(format!("#{t} {}→{}", x.name, y.name));
            }
        }
        out.push(Check::new("dinaturality of i_X (10 samples)", bad.is_empty(), bad.join(", ")));
        let small: Vec<&Rep> = pd.simples.iter().take(3).collect();
        let mut om = true;
        let mut pr = true;
        for x in &small {
            for y in &small {
                om &= self.omega_defined(cat, x, y);
                pr &= self.product_defined(cat, x, y);
            }
        }
        out.push(Check::new("Ω(i_X⊗i_Y) = (i_X⊗i_Y)(id⊗double braiding⊗id)", om, "on simples"));
        out.push(Check::new("μ_L(i_X⊗i_Y) = i_{X⊗Y}∘(braiding⊗id)", pr, "on simples"));
        out.push(Check::new("μ_L intertwines", cat.is_intertwiner(&cat.tensor(&self.l, &self.l), &self.l, &self.mu.to_dense()), ""));
        out.push(Check::new("μ_L associative and unital", self.algebra_samples(5, seed ^ 1), "5 random triples"));
        out.push(Check::new("integral solution space is 1-dimensional", self.integral_nullity == 1, format!("{}", self.integral_nullity)));
        out.push(Check::new("integral law μ(Λ⊗id) = Λε = μ(id⊗Λ)", self.integral_law(cat), ""));
        let absorb = small.iter().all(|x| self.absorbs(cat, x)) && self.absorbs(cat, &pd.generator);
        out.push(Check::new("μ(Λ⊗i_X) = Λ∘ev_X on probes", absorb, ""));
        let ss = self.s.try_mul(&self.s_prime).ok();
        let zeta_id = MatrixS::identity(f, d).scale(&self.zeta);
        out.push(Check::new("S invertible", self.s.rank() == d, format!("rank {}", self.s.rank())));
        out.push(Check::new("S∘S' = ζ·id", ss.as_ref() == Some(&zeta_id), ""));
        let unit = self.s_pair_unit().ok().and_then(|(a, b)| a.try_mul(&b).ok());
        out.push(Check::new("S⁻¹ = (id⊗ε)Ω⁻¹(Λ⊗id) for Λ = D⁻¹Λ_L", unit == Some(MatrixS::identity(f, d)), ""));
        out.push(Check::new("Ω⁻¹Ω = id", self.omega_inv.mul(&self.omega) == SpMat::identity(f, d * d), ""));
        out
    }
}

/// Ω from an element M = Σ M₁⊗M₂ of H⊗H: φ⊗ψ ↦ Σ φ(· M₁) ⊗ ψ(S(M₂) ·).
fn monodromy(cat: &RepCat, m: &crate::hopf::Tensor2) -> SpMat {
    let h = &*cat.h;
    let f = h.f;
    let d = h.d;
    let mut out = SpMat::zeros(f, d * d, d * d);
    for ((a, b), c) in m {
        let r = SpMat::from_dense(&h.rmat(&h.basis(*a)).transpose());
        let l = SpMat::from_dense(&h.lmat(&h.antipode.col(*b)).transpose());
        out = out.add_scaled(&r.kron(&l), c);
    }
    out
}

/// f_Λ : P_1 → G*⊗G with i_G∘f_Λ = Λ_L∘ε_1.
pub fn f_lambda(sess: &Session, coend: &CoendData) -> Result<MorRep> {
    let cat = &sess.cat;
    let pd = &sess.pd;
    let f = cat.field();
    let g = &pd.generator;
    let p1 = &pd.covers[0];
    let gdg = cat.tensor(&cat.dual(g), g);
    let basis = cat.hom_basis(p1, &gdg);
    let ig = structure_map(cat, g);
    let target = column(f, &coend.integral).mul(&SpMat::from_dense(&pd.eps1.matrix)).to_dense();
    let m = solve_in_basis(&basis, |b| ig.mul_dense(b), &target, "f_Lambda")?;
    if ig.mul_dense(&m) != target {
        return Err(Error::NoSolution("f_Lambda does not satisfy its defining equation".into()));
    }
    Ok(MorRep::new(p1, &gdg, m))
}

/// s_V : V → P_1⊗V with (ε_1⊗id)∘s_V = id_V.
pub fn s_v(sess: &Session, v: &Rep) -> Result<MorRep> {
    let cat = &sess.cat;
    let pd = &sess.pd;
    let f = cat.field();
    let p1v = cat.tensor(&pd.covers[0], v);
    let basis = cat.hom_basis(v, &p1v);
    let e = SpMat::from_dense(&pd.eps1.matrix).kron(&SpMat::identity(f, v.dim));
    let target = MatrixS::identity(f, v.dim);
    let m = solve_in_basis(&basis, |b| e.mul_dense(b), &target, "s_V")?;
    if e.mul_dense(&m) != target {
        return Err(Error::NoSolution("s_V does not satisfy its defining equation".into()));
    }
    Ok(MorRep::new(v, &p1v, m))
}

fn solve_in_basis(basis: &[MorRep], apply: impl Fn(&MatrixS) -> MatrixS, target: &MatrixS, what: &str) -> Result<MatrixS> {
    let f = target.field();
    let n = target.rows() * target.cols();
    let mut a = MatrixS::zeros(f, n, basis.len());
    for (k, b) in basis.iter().enumerate() {
        let img = apply(&b.matrix);
        for (i, x) in img.entries().iter().enumerate() {
            a.set(i, k, x.clone());
        }
    }
    let t = MatrixS::column(f, target.entries().to_vec());
    let (x, _) = a.solve(&t)?.ok_or_else(|| Error::NoSolution(what.into()))?;
    let (r, c) = basis.first().map(|b| b.matrix.shape()).unwrap_or((0, 0));
    let mut m = MatrixS::zeros(f, r, c);
    for (k, b) in basis.iter().enumerate() {
        m = &m + &b.matrix.scale(x.get(k, 0));
    }
    Ok(m)
}

/// The projective coend of a projective V: the section Φ_V, the retraction
/// i_G⊗id_V and everything built from them.
#[derive(Clone, Debug)]
pub struct ProjectiveCoend {
    pub v: Rep,
    pub f_lambda: MorRep,
    pub s_v: MorRep,
    /// G*⊗G⊗V
    pub ambient: Rep,
    /// L⊗V
    pub image: Rep,
    /// Φ_V : L⊗V → G*⊗G⊗V, F⊗v ↦ Σ F(Λ₁)(ρ_{G*}(Λ₂)⊗id)(f_Λ⊗id)s_V(v)
    pub phi: SpMat,
    /// i_G⊗id_V : G*⊗G⊗V → L⊗V
    pub retraction: SpMat,
}

impl ProjectiveCoend {
    pub fn build(sess: &Session, coend: &CoendData, v: &Rep) -> Result<ProjectiveCoend> {
        if !sess.is_projective_rep(v)? {
            return Err(Error::NotProjective(v.name.clone()));
        }
        let cat = &sess.cat;
        let h = &*cat.h;
        let f = h.f;
        let g = &sess.pd.generator;
        let gd = cat.dual(g);
        let fl = f_lambda(sess, coend)?;
        let sv = s_v(sess, v)?;
        let nv = v.dim;
        let gn = g.dim;
        let w = SpMat::from_dense(&fl.matrix).kron(&SpMat::identity(f, nv)).mul_dense(&sv.matrix);
        let big = gn * gn * nv;
        let ambient = cat.tensor_all(&[gd.clone(), g.clone(), v.clone()]);
        let image = cat.tensor(&coend.l, v);
        let id_rest = SpMat::identity(f, gn * nv);
        let dl = h.coproduct(&sess.cat.se.left_integral);
        let mut cols: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); h.d * nv];
        let mut cache: std::collections::HashMap<usize, MatrixS> = std::collections::HashMap::new();
        for ((a, b), c) in &dl {
            let yb = cache.entry(*b).or_insert_with(|| gd.basis_action(*b).kron(&id_rest).mul_dense(&w));
            for vv in 0..nv {
                let col = &mut cols[a * nv + vv];
                for r in 0..big {
                    let x = yb.get(r, vv);
                    if !x.is_zero() {
                        col.push((r, c * x));
                    }
                }
            }
        }
        let phi = SpMat::from_rows(f, h.d * nv, big, cols).transpose();
        let retraction = structure_map(cat, g).kron(&SpMat::identity(f, nv));
        Ok(ProjectiveCoend { v: v.clone(), f_lambda: fl, s_v: sv, ambient, image, phi, retraction })
    }

    /// (i_G⊗id)∘Φ_V = id_{L⊗V}.
    pub fn section_holds(&self) -> bool {
        let f = self.phi.field();
        self.retraction.mul(&self.phi) == SpMat::identity(f, self.image.dim)
    }

    pub fn phi_intertwines(&self, cat: &RepCat) -> bool {
        cat.is_intertwiner(&self.image, &self.ambient, &self.phi.to_dense())
    }

    /// i_{X,V} = Φ_V∘(i_X⊗id_V) : X*⊗X⊗V → G*⊗G⊗V.
    pub fn i_xv(&self, cat: &RepCat, x: &Rep) -> SpMat {
        let f = cat.field();
        self.phi.mul(&structure_map(cat, x).kron(&SpMat::identity(f, self.v.dim)))
    }

    /// ℓ_V = i_{G,V}.
    pub fn ell(&self) -> SpMat {
        self.phi.mul(&self.retraction)
    }

    /// ℓ_V∘ℓ_V, associated as Φ((i_G⊗id)Φ)(i_G⊗id) so that no product of
    /// two ambient-sized matrices is formed.
    pub fn ell_squared(&self) -> SpMat {
        self.phi.mul(&self.retraction.mul(&self.phi)).mul(&self.retraction)
    }

    /// i_{G,V}∘i_{X,V}, associated the same way.
    pub fn absorb(&self, cat: &RepCat, x: &Rep) -> SpMat {
        let ixv = self.i_xv(cat, x);
        self.phi.mul(&self.retraction.mul(&ixv))
    }

    /// im ℓ_V ≅ L⊗V, split by (Φ_V, i_G⊗id). Returns the image object,
    /// its section and retraction.
    pub fn split(&self) -> Result<(Rep, MorRep, MorRep)> {
        if !self.section_holds() {
            return Err(Error::NotIdempotent);
        }
        let sec = MorRep::new(&self.image, &self.ambient, self.phi.to_dense());
        let ret = MorRep::new(&self.ambient, &self.image, self.retraction.to_dense());
        Ok((self.image.clone(), sec, ret))
    }

    /// η_G∘i_{X,V} = η_X for every probe X; returns the first failing probe.
    pub fn universal_property_check(
        &self,
        cat: &RepCat,
        generator: &Rep,
        family: &dyn Fn(&Rep) -> Result<SpMat>,
        probes: &[Rep],
    ) -> Result<Option<String>> {
        let f = cat.field();
        let eta_g_phi = family(generator)?.mul(&self.phi);
        for x in probes {
            let lhs = eta_g_phi.mul(&structure_map(cat, x).kron(&SpMat::identity(f, self.v.dim)));
            if lhs != family(x)? {
                return Ok(Some(x.name.clone()));
            }
        }
        Ok(None)
    }

    /// Write ℓ_V = Σ ℓ'_i ⊗ ℓ''_i with ℓ'_i ∈ End(G*) and ℓ''_i ∈ End(G⊗V).
    pub fn factor_boxtimes(&self, cat: &RepCat, generator: &Rep) -> Result<Vec<(MorRep, MorRep)>> {
        let f = cat.field();
        let gd = cat.dual(generator);
        let gv = cat.tensor(generator, &self.v);
        let (g, m) = (gd.dim, gv.dim);
        let ell = self.ell();
        let ends = cat.hom_basis(&gd, &gd);
        let k = ends.len();
        // E: columns vec(ℓ'_i); choose k independent rows of E
        let e = MatrixS::from_fn(f, g * g, k, |ab, i| ends[i].matrix.get(ab / g, ab % g).clone());
        let piv = e.transpose().rref().pivots;
        if piv.len() != k {
            return Err(Error::NoFactorization);
        }
        let e_inv = e.select_rows(&piv).inverse()?;
        // R[(a,b)] = block of ℓ at G* indices (a, b), as a sparse m×m matrix
        let block = |a: usize, b: usize| -> SpMat {
            let rows = (0..m)
                .map(|r| {
                    ell.row(a * m + r)
                        .iter()
                        .filter(|(c, _)| c / m == b)
                        .map(|(c, x)| (c % m, x.clone()))
                        .collect()
                })
                .collect();
            SpMat::from_rows(f, m, m, rows)
        };
        let blocks: Vec<SpMat> = piv.iter().map(|&ab| block(ab / g, ab % g)).collect();
        let mut ys = Vec::with_capacity(k);
        for i in 0..k {
            let mut y = SpMat::zeros(f, m, m);
            for (j, bl) in blocks.iter().enumerate() {
                let c = e_inv.get(i, j);
                if !c.is_zero() {
                    y = y.add_scaled(bl, c);
                }
            }
            ys.push(y);
        }
        let mut out = Vec::new();
        let mut sum = SpMat::zeros(f, g * m, g * m);
        for (e_i, y) in ends.iter().zip(&ys) {
            if y.is_zero() {
                continue;
            }
            let yd = y.to_dense();
            if !cat.is_intertwiner(&gv, &gv, &yd) {
                return Err(Error::NoFactorization);
            }
            sum = sum.add_scaled(&SpMat::from_dense(&e_i.matrix).kron(y), &Scalar::one(f));
            out.push((e_i.clone(), MorRep::new(&gv, &gv, yd)));
        }
        if sum != ell {
            return Err(Error::NoFactorization);
        }
        Ok(out)
    }

    /// i_{X,V} from its defining diagram: ζ⁻¹ F_Λ of the s_V and f_Λ coupons
    /// followed by a 0-framed red circle around the X and G* strands and
    /// the evaluation of X.
    pub fn i_xv_diagram(&self, sess: &Session, x_label: &str, v_label: &str) -> Result<MatrixS> {
        let text = format!(
            "# i_X,V\n\
             coupon sV : {v}+ -> P1+ {v}+ = unbound\n\
             coupon fL : P1+ -> G- G+ = unbound\n\
             in: {x}- {x}+ {v}+\n\
             id({x}-) id({x}+) coupon(sV)\n\
             id({x}-) id({x}+) coupon(fL) id({v}+)\n\
             id({x}-) red:cup(+) id({x}+) id(G-) id(G+) id({v}+)\n\
             id({x}-) red:id(+) x+ id(G-) id(G+) id({v}+)\n\
             id({x}-) red:id(+) id({x}+) x+ id(G+) id({v}+)\n\
             id({x}-) red:id(+) id({x}+) x+ id(G+) id({v}+)\n\
             id({x}-) red:id(+) x+ id(G-) id(G+) id({v}+)\n\
             id({x}-) cap id({x}+) id(G-) id(G+) id({v}+)\n\
             cap id(G-) id(G+) id({v}+)\n",
            x = x_label,
            v = v_label
        );
        let mut d = Diagram::parse(&text)?;
        d.bind("sV", matrix_value(&self.s_v.matrix))?;
        d.bind("fL", matrix_value(&self.f_lambda.matrix))?;
        let ev = sess.lrt_evaluate(&d)?;
        Ok(ev.matrix.scale(&sess.stab.zeta.inv()?))
    }
}

pub fn matrix_value(m: &MatrixS) -> CouponValue {
    CouponValue::Matrix { rows: m.rows(), cols: m.cols(), entries: m.entries().iter().map(|x| x.to_string()).collect() }
}

/// The full battery for one projective V: idempotency, absorption on
/// probes, the splitting, dinaturality and the universal property.
pub fn projective_checks(sess: &Session, coend: &CoendData, pc: &ProjectiveCoend, seed: u64) -> Result<Vec<Check>> {
    let cat = &sess.cat;
    let pd = &sess.pd;
    let f = cat.field();
    let g = &pd.generator;
    let vn = &pc.v.name;
    let mut out = Vec::new();
    let defining_fl = structure_map(cat, g).mul_dense(&pc.f_lambda.matrix)
        == column(f, &coend.integral).mul(&SpMat::from_dense(&pd.eps1.matrix)).to_dense();
    out.push(Check::new(format!("[{vn}] i_G∘f_Λ = Λ∘ε_1"), defining_fl, ""));
    let defining_sv = SpMat::from_dense(&pd.eps1.matrix).kron(&SpMat::identity(f, pc.v.dim)).mul_dense(&pc.s_v.matrix)
        == MatrixS::identity(f, pc.v.dim);
    out.push(Check::new(format!("[{vn}] (ε_1⊗id)∘s_V = id"), defining_sv, ""));
    out.push(Check::new(format!("[{vn}] (i_G⊗id)∘Φ_V = id"), pc.section_holds(), ""));
    out.push(Check::new(format!("[{vn}] Φ_V intertwines"), pc.phi_intertwines(cat), ""));
    let ell = pc.ell();
    out.push(Check::new(format!("[{vn}] ℓ_V∘ℓ_V = ℓ_V"), pc.ell_squared() == ell, format!("{}x{}", ell.rows(), ell.cols())));
    let (im, _, _) = pc.split()?;
    let expected = cat.h.d * pc.v.dim;
    out.push(Check::new(format!("[{vn}] dim im ℓ_V = d·dim V"), im.dim == expected, format!("{} vs {}", im.dim, expected)));
    let mut probes: Vec<Rep> = vec![cat.trivial.clone()];
    probes.extend(pd.simples.iter().cloned());
    probes.push(g.clone());
    let mut absorb_ok = Vec::new();
    for x in &probes {
        if pc.absorb(cat, x) != pc.i_xv(cat, x) {
            absorb_ok.push(x.name.clone());
        }
    }
    out.push(Check::new(format!("[{vn}] i_G,V∘i_X,V = i_X,V on probes"), absorb_ok.is_empty(), absorb_ok.join(", ")));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for t in 0..3 {
        let x = &pd.simples[rng.gen_range(0..pd.simples.len())];
        let y = &pd.covers[rng.gen_range(0..pd.covers.len())];
        let h = random_morphism(cat, x, y, &mut rng);
        let lhs = pc.i_xv(cat, x).mul(&SpMat::from_dense(&h.matrix.transpose()).kron(&SpMat::identity(f, x.dim * pc.v.dim)));
        let rhs = pc.i_xv(cat, y).mul(&SpMat::identity(f, y.dim).kron(&SpMat::from_dense(&h.matrix)).kron(&SpMat::identity(f, pc.v.dim)));
        if lhs != rhs {
            bad.push(format!("#{t}"));
        }
    }
    out.push(Check::new(format!("[{vn}] dinaturality of i_X,V"), bad.is_empty(), bad.join(", ")));

    // universal property: η_X = r∘i_{X,V} into im ℓ_V split as L⊗V
    let r = pc.retraction.clone();
    let phi = pc.phi.clone();
    let own = |x: &Rep| -> Result<SpMat> { Ok(r.mul(&phi).mul(&structure_map(cat, x).kron(&SpMat::identity(f, pc.v.dim)))) };
    let res = pc.universal_property_check(cat, g, &own, &probes)?;
    out.push(Check::new(format!("[{vn}] universal property: η = i_X,V"), res.is_none(), res.unwrap_or_default()));
    // negative control: a non-dinatural perturbation on one probe
    let victim = pd.simples.last().unwrap_or(g).clone();
    let vname = victim.name.clone();
    let pert = |x: &Rep| -> Result<SpMat> {
        let base = own(x)?;
        if x.name != vname {
            return Ok(base);
        }
        let mut m = base.to_dense();
        let v = m.get(0, 0) + &Scalar::one(f);
        m.set(0, 0, v);
        Ok(SpMat::from_dense(&m))
    };
    let res = pc.universal_property_check(cat, g, &pert, &probes)?;
    out.push(Check::new(
        format!("[{vn}] universal property rejects a perturbed family"),
        res.as_deref() == Some(victim.name.as_str()),
        res.unwrap_or_default(),
    ));
    // derived: η_X = k∘(i_X⊗id) for a morphism k = θ_L ⊗ f_V
    let fv = random_morphism(cat, &pc.v, &pc.v, &mut rng);
    let k = SpMat::from_dense(&cat.twist(&coend.l).matrix).kron(&SpMat::from_dense(&fv.matrix));
    let derived = |x: &Rep| -> Result<SpMat> { Ok(k.mul(&structure_map(cat, x).kron(&SpMat::identity(f, pc.v.dim)))) };
    let res = pc.universal_property_check(cat, g, &derived, &probes)?;
    out.push(Check::new(format!("[{vn}] universal property: η = k∘(i_X⊗id)"), res.is_none(), res.unwrap_or_default()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends;

    fn abelian() -> Session {
        Session::new(backends::abelian_modular()).unwrap()
    }

    #[test]
    fn abelian_coend_battery() {
        let s = abelian();
        let c = CoendData::build(&s).unwrap();
        for ch in c.checks(&s, 7) {
            assert!(ch.pass, "{} {}", ch.name, ch.detail);
        }
        let sl = c.antipode().unwrap();
        assert_eq!(sl.shape(), (3, 3));
        for v in s.pd.covers.clone() {
            let pc = ProjectiveCoend::build(&s, &c, &v).unwrap();
            for ch in projective_checks(&s, &c, &pc, 3).unwrap() {
                assert!(ch.pass, "{} {}", ch.name, ch.detail);
            }
            let direct = pc.ell().mul(&pc.ell());
            assert_eq!(direct, pc.ell());
            let parts = pc.factor_boxtimes(&s.cat, &s.pd.generator).unwrap();
            assert!(!parts.is_empty());
        }
    }

    #[test]
    fn diagram_matches_closed_form() {
        let s = abelian();
        let c = CoendData::build(&s).unwrap();
        let v = s.pd.covers[0].clone();
        let pc = ProjectiveCoend::build(&s, &c, &v).unwrap();
        for x in ["1", "V1", "V2"] {
            let xr = s.pd.lookup(x).cloned().unwrap_or_else(|| s.cat.trivial.clone());
            let diag = pc.i_xv_diagram(&s, x, &v.name).unwrap();
            assert_eq!(diag, pc.i_xv(&s.cat, &xr).to_dense(), "X = {x}");
        }
    }

    #[test]
    fn uq_coend_battery() {
        let s = Session::new(backends::uqsl2()).unwrap();
        let c = CoendData::build(&s).unwrap();
        for ch in c.checks(&s, 11) {
            assert!(ch.pass, "{} {}", ch.name, ch.detail);
        }
        let v = s.pd.covers[0].clone();
        let pc = ProjectiveCoend::build(&s, &c, &v).unwrap();
        assert!(pc.section_holds());
        let diag = pc.i_xv_diagram(&s, "V2", &v.name).unwrap();
        assert_eq!(diag, pc.i_xv(&s.cat, &s.pd.simples[1]).to_dense());
    }
}

#[cfg(test)]
mod uq_projective {
    use super::*;
    use crate::backends;

    #[test]
    fn uq_projective_battery() {
        let s = Session::new(backends::uqsl2()).unwrap();
        let c = CoendData::build(&s).unwrap();
        for v in s.pd.covers.clone() {
            
            let pc = ProjectiveCoend::build(&s, &c, &v).unwrap();
            for ch in projective_checks(&s, &c, &pc, 5).unwrap() {
                assert!(ch.pass, "{} {}", ch.name, ch.detail);
            }
        }
        let pc = ProjectiveCoend::build(&s, &c, &s.pd.covers[0]).unwrap();
        
        let parts = pc.factor_boxtimes(&s.cat, &s.pd.generator).unwrap();
        let gd = s.cat.dual(&s.pd.generator);
        assert!(!parts.is_empty() && parts.len() <= s.cat.hom_dim(&gd, &gd));
    }
}
