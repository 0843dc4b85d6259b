use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::complexes::{null_homotopy, ChainMap, Complex, Homotopy};
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, smith_normal_form, solve_linear, CokernelInvariants, Matrix};
use crate::modules::{Module, Morphism};
use crate::resolution::{zeta_object, Resolution};

use super::duality::check_homology_in_a;
use super::forms::{dual_complex, dual_map, ComplexForm, ComplexLagrangian, Convention, Direction, Isometry, ModuleForm, SignedStandardize};
use super::object::AObject;

fn failed(step: usize, reason: impl Into<String>) -> Error {
    Error::ReductionStepFailed { step, reason: reason.into() }
}

/// Half-width of the (symmetric) homology window, `None` when exact.
pub fn window_radius(e: &Complex) -> Option<i64> {
    e.homology_window().map(|(lo, hi)| (-lo).max(hi).max(0))
}

/// Restriction of a form along an inclusion `E' -> E` supported on
/// `[-n, n+d]`: the bottom is replaced by its cycles and the top is peeled
/// off one split-injective differential at a time. The pullback is strict,
/// so the isometry carries the zero homotopy.
pub fn truncate_form(c: &ComplexForm) -> Result<(ComplexForm, Isometry)> {
    let ring = c.ring();
    let d = c.d();
    let e = &c.complex;
    let Some(n) = window_radius(e) else {
        let z = Complex::zero(ring);
        let map = ChainMap::zero(&z, e);
        let f = c.pullback(&map);
        let h = Homotopy::zero(&z, &f.target());
        return Ok((f, Isometry { map, homotopy: h }));
    };
    let mut cur = e.clone();
    let mut total = ChainMap::identity(e);

    let (lo, _) = cur.bounds();
    if lo < -n {
        let zb = kernel_basis(&cur.d(-n));
        let up = solve_linear(&zb, &cur.d(-n + 1))?.ok_or_else(|| failed(0, "boundaries are not cycles"))?;
        let next = Complex::from_fn(
            ring,
            -n,
            cur.bounds().1,
            |r| if r == -n { zb.cols() } else { cur.rank(r) },
            |r| if r == -n + 1 { up.clone() } else { cur.d(r) },
        );
        let step = ChainMap::from_fn(&next, &cur, |r| if r == -n { zb.clone() } else { Matrix::identity(ring, cur.rank(r)) });
        total = total.after(&step);
        cur = next;
    }
    while cur.bounds().1 > n + d {
        let t = cur.bounds().1;
        let dt = cur.d(t);
        let s = smith_normal_form(&dt);
        let k = s.rank();
        if k != dt.cols() || !s.invariant_factors.iter().all(|x| ring.is_unit(x)) {
            return Err(failed(0, format!("top differential in degree {t} is not split injective")));
        }
        let sigma = s.u_inv.submatrix(0..dt.rows(), k..dt.rows());
        let lo = cur.bounds().0;
        let next = Complex::from_fn(
            ring,
            lo,
            t - 1,
            |r| if r == t - 1 { sigma.cols() } else { cur.rank(r) },
            |r| if r == t - 1 { cur.d(r).mul(&sigma) } else { cur.d(r) },
        );
        let step = ChainMap::from_fn(&next, &cur, |r| if r == t - 1 { sigma.clone() } else { Matrix::identity(ring, cur.rank(r)) });
        total = total.after(&step);
        cur = next;
    }
    let f = c.pullback(&total);
    let h = Homotopy::zero(&f.complex, &f.target());
    Ok((f, Isometry { map: total, homotopy: h }))
}

/// `ν: L -> E` from a resolution of `H_n(E)` placed in degrees
/// `[n, n+d]`, with a null homotopy of `ν*φν`.
#[derive(Clone, Debug)]
pub struct Sublagrangian {
    pub degree: i64,
    pub homology: Module,
    pub resolution: Arc<Resolution>,
    pub l: Complex,
    pub nu: ChainMap,
    pub null: Homotopy,
}

impl Sublagrangian {
    pub fn is_zero(&self) -> bool {
        self.l.is_zero_complex()
    }
}

pub fn sublagrangian_candidate(c: &ComplexForm) -> Result<Sublagrangian> {
    let d = c.d();
    let e = &c.complex;
    let n = match window_radius(e) {
        Some(n) if n > 0 => n,
        _ => return Err(Error::WindowAlreadyMinimal),
    };
    let hd = e.homology(n);
    let res = zeta_object(&hd.module);
    let p = &res.complex;
    let l = p.translate(n, false);
    let mut comps = std::collections::BTreeMap::new();
    comps.insert(n, hd.cycles.mul(res.augmentation.matrix()));
    for j in 1..=d {
        let r = n + j;
        let rhs = comps[&(r - 1)].mul(&l.d(r));
        let x = solve_linear(&e.d(r), &rhs)?.ok_or_else(|| failed(0, format!("ν does not extend to degree {r}")))?;
        comps.insert(r, x);
    }
    let nu = ChainMap::new(l.clone(), e.clone(), comps)?;
    let ld = dual_complex(&l, d, c.convention);
    let eta = dual_map(&nu, d, c.convention).after(&c.phi).after(&nu);
    let eta = ChainMap::from_fn(&l, &ld, |r| eta.at(r));
    let null = null_homotopy(&eta)?.ok_or_else(|| failed(0, "ν*φν is not null-homotopic"))?;
    Ok(Sublagrangian { degree: n, homology: hd.module, resolution: res, l, nu, null })
}

/// Block matrix from a 3x3 grid, `None` entries zero.
fn grid(ring: crate::rings::Ring, rows: [usize; 3], cols: [usize; 3], cells: [[Option<Matrix>; 3]; 3]) -> Matrix {
    let mut out = Matrix::zeros(ring, rows.iter().sum(), cols.iter().sum());
    let mut r0 = 0;
    for (i, row) in cells.iter().enumerate() {
        let mut c0 = 0;
        for (j, cell) in row.iter().enumerate() {
            if let Some(m) = cell {
                debug_assert_eq!(m.shape(), (rows[i], cols[j]));
                for a in 0..rows[i] {
                    for b in 0..cols[j] {
                        out.set(r0 + a, c0 + b, m.get(a, b).clone());
                    }
                }
            }
            c0 += cols[j];
        }
        r0 += rows[i];
    }
    out
}

/// One surgery: the new form and a strict lagrangian of `φ ⊥ -ψ`
/// exhibiting the Witt equivalence.
#[derive(Clone, Debug)]
pub struct Surgery {
    pub form: ComplexForm,
    /// `α: K -> E ⊕ R` for the form `φ ⊥ -ψ`.
    pub witness: ComplexLagrangian,
    pub difference: ComplexForm,
}

impl Surgery {
    /// `[α*Φ, 0]: cone(α) -> K*` is a quasi-isomorphism.
    pub fn check_witness(&self) -> bool {
        self.witness.check(&self.difference).is_ok()
    }
}

/// With `μ = ν*φ: E -> L*` and `μν = 0`,
/// `R_r = L*_{r+1} ⊕ E_r ⊕ L_{r-1}`,
/// `∂(λ, e, l) = (-∂λ - μe, ∂e + νl, -∂l)`,
/// `ψ(λ, e, l) = (-ε l, φ e, -λ)` into `R*_r = L_{r-1} ⊕ E*_r ⊕ L*_{r+1}`.
/// `ψ` is strictly `ε`-symmetric whenever `φ` is; the fiber `K` of `μ`
/// maps into `E ⊕ R` by `(λ, e) ↦ (e, (λ, e, 0))` as a strict lagrangian
/// of `φ ⊥ -ψ`.
pub fn surgery(c: &ComplexForm, sub: &Sublagrangian) -> Result<Surgery> {
    if c.convention != Convention::Unsigned {
        return Err(failed(0, "surgery runs in the unsigned convention"));
    }
    if !c.is_strictly_symmetric() {
        return Err(failed(0, "surgery needs a strictly symmetric form"));
    }
    let ring = c.ring();
    let d = c.d();
    let e = &c.complex;
    let l = &sub.l;
    let ld = dual_complex(l, d, Convention::Unsigned);
    let mu = dual_map(&sub.nu, d, Convention::Unsigned).after(&c.phi);
    let mu = ChainMap::from_fn(e, &ld, |r| mu.at(r));
    let mu_nu = mu.after(&sub.nu);
    let (llo, lhi) = l.bounds();
    if !(llo..=lhi).all(|r| mu_nu.at(r).is_zero()) {
        return Err(failed(0, "ν*φν is not strictly zero"));
    }
    let eps = ring.int(c.epsilon);
    let one = ring.int(1);
    let rank3 = |r: i64| [ld.rank(r + 1), e.rank(r), l.rank(r - 1)];
    let (dlo, dhi) = ld.bounds();
    let (elo, ehi) = e.bounds();
    let lo = [dlo - 1, elo, llo + 1].into_iter().min().unwrap();
    let hi = [dhi - 1, ehi, lhi + 1].into_iter().max().unwrap();
    let rc = Complex::from_fn(
        ring,
        lo,
        hi,
        |r| rank3(r).iter().sum(),
        |r| {
            grid(
                ring,
                rank3(r - 1),
                rank3(r),
                [
                    [Some(ld.d(r + 1).neg()), Some(mu.at(r).neg()), None],
                    [None, Some(e.d(r)), Some(sub.nu.at(r - 1))],
                    [None, None, Some(l.d(r - 1).neg())],
                ],
            )
        },
    );
    let rd = dual_complex(&rc, d, Convention::Unsigned);
    let psi = ChainMap::from_fn(&rc, &rd, |r| {
        let src = rank3(r);
        let tgt = [l.rank(r - 1), e.rank(d - r), ld.rank(r + 1)];
        grid(
            ring,
            tgt,
            src,
            [
                [None, None, Some(Matrix::scalar(ring, src[2], &ring.neg(&eps)))],
                [None, Some(c.phi.at(r)), None],
                [Some(Matrix::scalar(ring, src[0], &ring.neg(&one))), None, None],
            ],
        )
    });
    if !psi.is_chain_map() {
        return Err(failed(0, "surgery form is not a chain map"));
    }
    let form = ComplexForm::new_unchecked(psi, c.epsilon, Convention::Unsigned, Homotopy::zero(&rc, &rd));
    if !form.is_strictly_symmetric() {
        return Err(failed(0, "surgery form is not symmetric"));
    }

    // Fiber of μ and its map into E ⊕ R.
    let krank = |r: i64| ld.rank(r + 1) + e.rank(r);
    let kc = Complex::from_fn(
        ring,
        lo.min(elo),
        hi.max(ehi),
        krank,
        |r| Matrix::blocks(&ld.d(r + 1).neg(), &mu.at(r).neg(), &Matrix::zeros(ring, e.rank(r - 1), ld.rank(r + 1)), &e.d(r)),
    );
    let difference = c.orthogonal_sum(&form.neg())?;
    let alpha = ChainMap::from_fn(&kc, &difference.complex, |r| {
        let (a, b) = (ld.rank(r + 1), e.rank(r));
        let to_e = Matrix::zeros(ring, b, a).hstack(&Matrix::identity(ring, b));
        let to_r = Matrix::identity(ring, a + b).vstack(&Matrix::zeros(ring, l.rank(r - 1), a + b));
        to_e.vstack(&to_r)
    });
    if !alpha.is_chain_map() {
        return Err(failed(0, "fiber map is not a chain map"));
    }
    let kd = dual_complex(&kc, d, Convention::Unsigned);
    let witness = ComplexLagrangian { alpha, null: Homotopy::zero(&kc, &kd) };
    Ok(Surgery { form, witness, difference })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Strictify,
    Truncate,
    Surgery,
    Extract,
}

/// One ledger line; `validated` records the outcome of the step's own
/// witness check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerStep {
    pub index: usize,
    pub kind: StepKind,
    pub support_before: Option<(i64, i64)>,
    pub support_after: Option<(i64, i64)>,
    pub window_before: Option<(i64, i64)>,
    pub window_after: Option<(i64, i64)>,
    /// Invariants of the homology module removed by a surgery.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub removed: Option<CokernelInvariants>,
    pub validated: bool,
}

#[derive(Clone, Debug)]
pub struct Reduction {
    /// Final form, supported on `[0, d]` with homology in degree 0 only.
    pub form: ComplexForm,
    pub extracted: ModuleForm,
    pub ledger: Vec<LedgerStep>,
    /// Composite isometry from `form` to the (unsigned) input; present
    /// when no surgery was needed.
    pub isometry: Option<Isometry>,
    pub surgeries: Vec<Surgery>,
}

impl Reduction {
    pub fn validated(&self) -> bool {
        self.ledger.iter().all(|s| s.validated)
    }

    pub fn surgery_count(&self) -> usize {
        self.surgeries.len()
    }
}

fn record(
    ledger: &mut Vec<LedgerStep>,
    kind: StepKind,
    before: &Complex,
    after: &Complex,
    removed: Option<CokernelInvariants>,
    validated: bool,
) {
    ledger.push(LedgerStep {
        index: ledger.len(),
        kind,
        support_before: before.support(),
        support_after: after.support(),
        window_before: before.homology_window(),
        window_after: after.homology_window(),
        removed,
        validated,
    });
}

/// Options for [`reduce_support`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ReduceOptions {
    /// Check every isometry and surgery witness (cone exactness tests).
    pub verify: bool,
}

/// Truncate, remove the top homology by surgery, repeat until the window
/// is `[0, 0]`, then read off the module form on `H_0`.
pub fn reduce_support(c: &ComplexForm, opts: ReduceOptions) -> Result<Reduction> {
    check_homology_in_a(&c.complex)?;
    let input = c.signed_standardize(Direction::ToUnsigned);
    let mut ledger = Vec::new();

    let (mut cur, strict_iso) = input.strictify()?;
    let ok = !opts.verify || strict_iso.validate(&cur, &input);
    record(&mut ledger, StepKind::Strictify, &input.complex, &cur.complex, None, ok);
    let mut iso = Some(strict_iso);
    let mut surgeries = Vec::new();

    loop {
        let step = ledger.len();
        let (t, t_iso) = truncate_form(&cur).map_err(|e| reindex(e, step))?;
        let ok = !opts.verify || t_iso.validate(&t, &cur);
        record(&mut ledger, StepKind::Truncate, &cur.complex, &t.complex, None, ok);
        iso = iso.map(|outer| t_iso.then(&outer, &cur));
        cur = t;
        match window_radius(&cur.complex) {
            Some(n) if n > 0 => {
                let step = ledger.len();
                let sub = sublagrangian_candidate(&cur).map_err(|e| reindex(e, step))?;
                let s = surgery(&cur, &sub).map_err(|e| reindex(e, step))?;
                let shrunk = window_radius(&s.form.complex).is_none_or(|m| m < n);
                if !shrunk {
                    return Err(failed(step, format!("window did not shrink below {n}")));
                }
                let ok = !opts.verify || (s.form.phi.is_quasi_iso() && s.check_witness());
                record(&mut ledger, StepKind::Surgery, &cur.complex, &s.form.complex, Some(sub.homology.invariants()), ok);
                cur = s.form.clone();
                surgeries.push(s);
                iso = None;
            }
            _ => break,
        }
    }

    let extracted = extract(&cur)?;
    record(&mut ledger, StepKind::Extract, &cur.complex, &cur.complex, None, true);
    let extracted = match c.convention {
        Convention::Unsigned => extracted,
        Convention::Standard => extracted.signed_standardize(Direction::ToStandard),
    };
    Ok(Reduction { form: cur, extracted, ledger, isometry: iso, surgeries })
}

fn reindex(e: Error, step: usize) -> Error {
    match e {
        Error::ReductionStepFailed { reason, .. } => Error::ReductionStepFailed { step, reason },
        other => other,
    }
}

/// `(H_0(E), φ_0)` for a form supported on `[0, d]` with homology in
/// degree 0; `E` is a resolution of `coker ∂_1`.
pub fn extract(c: &ComplexForm) -> Result<ModuleForm> {
    let ring = c.ring();
    let d = c.d();
    let e = &c.complex;
    if let Some((lo, hi)) = e.support() {
        if lo < 0 || hi > d {
            return Err(Error::ShapeMismatch(format!("support [{lo}, {hi}] is not within [0, {d}]")));
        }
    }
    let module = Module::new(e.d(1));
    let res = Resolution::new(module, e.clone(), Matrix::identity(ring, e.rank(0)))?;
    let object = AObject::with_resolution(res)?;
    ModuleForm::new(object, c.phi.at(0), c.epsilon, c.convention)
}

/// The module isometry `g: M' -> M` induced by a chain isometry `q` from
/// the carrier of `extracted` into the resolution of `seed`, checked
/// against `φ' = g^∨ φ g`.
pub fn induced_module_isometry(q: &ChainMap, extracted: &ModuleForm, seed: &ModuleForm) -> Result<Morphism> {
    let d = seed.d();
    let res = &seed.object.resolution;
    if q.source() != extracted.object.complex() || q.target() != &res.complex {
        return Err(Error::ShapeMismatch("isometry does not connect the two resolutions".into()));
    }
    let g = Morphism::new(
        extracted.object.module.clone(),
        seed.object.module.clone(),
        res.augmentation.matrix().mul(&q.at(0)),
    )?;
    let gd = Morphism::new(seed.object.dual().module, extracted.object.dual().module, q.at(d).transpose())?;
    let pulled = gd.after(&seed.phi).after(&g);
    if !g.is_iso() || !pulled.equals(&extracted.phi) {
        return Err(Error::IllFormedMorphism("induced map is not an isometry".into()));
    }
    Ok(g)
}
