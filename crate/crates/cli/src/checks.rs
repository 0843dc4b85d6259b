//! One check per suite. A check reads only its instance, so replaying a
//! stored payload reruns exactly the same computation.

use devissage::complexes::{are_homotopic, find_homotopy, null_homotopy, Complex};
use devissage::modules::{ext, Morphism};
use devissage::resolution::{lift_morphism, lift_triple, normalize_roof, pullback_complexes, resolve_module, resolve_presentation, Zeta};
use devissage::witt::*;
use devissage::{Error, Matrix, Ring};
use serde_json::{json, Value};

use crate::config::Suite;
use crate::gen::form_from_gram;
use crate::instance::{chain_map, lagrangian, FormJson, Instance};
use crate::oracle::{diagonal_kernel, AnisotropicKernel};

/// Why a trial failed: an engine error, or a property that did not hold.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Failure {
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure { reason: e.to_string(), error: Some(error_kind(&e)) }
    }
}

/// The variant name of an engine error.
pub fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
}

type Outcome = Result<Value, Failure>;

fn ensure(cond: bool, reason: impl Into<String>) -> Result<(), Failure> {
    if cond {
        Ok(())
    } else {
        Err(Failure { reason: reason.into(), error: None })
    }
}

fn wrong_kind(suite: Suite, inst: &Instance) -> Failure {
    Failure { reason: format!("suite {suite} cannot check a {} instance", inst.kind()), error: Some("UnknownKind".into()) }
}

pub fn check(suite: Suite, inst: &Instance) -> Outcome {
    match (suite, inst) {
        (Suite::Duality, Instance::ComplexInA { complex, target, map }) => {
            let e = Complex::from_json(complex)?;
            let g = match (target, map) {
                (Some(t), Some(m)) => Some(chain_map(&e, &Complex::from_json(t)?, m)?),
                _ => None,
            };
            duality(&e, g.as_ref())
        }
        (Suite::ExtBoundary, Instance::ComplexInA { complex, .. }) => ext_boundary(&Complex::from_json(complex)?),
        (Suite::ZetaFunctoriality, Instance::MorphismPair { m, n, l, g0, g1 }) => {
            let g0 = Morphism::new(m.clone(), n.clone(), Matrix::from_json(m.ring(), g0)?)?;
            let g1 = Morphism::new(n.clone(), l.clone(), Matrix::from_json(m.ring(), g1)?)?;
            zeta_functoriality(&g0, &g1)
        }
        (Suite::WittMap, Instance::NeutralForm { form, lagrangian: lag }) => {
            let f = form.to_form()?;
            witt_map(&f, &lagrangian(lag, &f)?)
        }
        (Suite::Devissage, Instance::ComplexForm { seed, form, quasi_iso }) => {
            let seed = seed.to_form()?;
            let c = ComplexForm::from_json(form)?;
            let target = zeta_form(&seed)?;
            let q = chain_map(&c.complex, &target.complex, quasi_iso)?;
            devissage_round_trip(&seed, &c, &q)
        }
        (Suite::DevissageSpread, Instance::SpreadForm { seed, form }) => spread(&seed.to_form()?, &ComplexForm::from_json(form)?),
        (Suite::Decomposition, Instance::ModuleForm { form }) => decomposition(form),
        (Suite::WittBase, Instance::DiagonalPair { ring, left, right }) => witt_base(*ring, left, right),
        (Suite::Membership, Instance::ModuleComplex { ring, complex }) => {
            let c = complex.to_complex(*ring)?;
            let recs = membership_check(&c);
            let bad: Vec<i64> = recs.iter().filter(|r| !r.passes()).map(|r| r.degree).collect();
            ensure(bad.is_empty(), format!("pieces outside A in degrees {bad:?}"))?;
            Ok(json!({ "degrees": recs.len() }))
        }
        _ => Err(wrong_kind(suite, inst)),
    }
}

fn duality(e: &Complex, g: Option<&devissage::complexes::ChainMap>) -> Outcome {
    let d = e.ring().d() as i64;
    let (lo, hi) = e.bounds();
    let degrees: Vec<i64> = (-hi - 1..=-lo + d + 1).collect();
    for &r in &degrees {
        let h = homology_duality(e, r)?;
        ensure(h.is_iso(), format!("η is not an isomorphism in degree {r}"))?;
        let oracle = ext(&e.homology(r - d).module, d as usize).invariants();
        ensure(
            h.dual_homology.module.invariants() == oracle,
            format!("H_{{-{r}}}(E^#) and Ext^d(H_{}(E)) differ", r - d),
        )?;
    }
    let mut natural = 0;
    if let Some(g) = g {
        let (flo, fhi) = g.target().bounds();
        for r in (-hi.max(fhi) - 1)..=(-lo.min(flo) + d + 1) {
            ensure(duality_naturality(g, r)?, format!("naturality square fails in degree {r}"))?;
            natural += 1;
        }
    }
    Ok(json!({ "degrees": degrees.len(), "naturality_degrees": natural }))
}

fn ext_boundary(e: &Complex) -> Outcome {
    let d = e.ring().d() as usize;
    let (lo, hi) = e.bounds();
    let mut checked = 0;
    for r in lo - 1..=hi + 1 {
        for i in 1..=d + 2 {
            let rec = ext_boundary_check(e, r, i)?;
            ensure(rec.agrees, format!("Ext^{i} formula fails in degree {r}"))?;
            checked += 1;
        }
    }
    Ok(json!({ "instances": checked }))
}

fn zeta_functoriality(g0: &Morphism, g1: &Morphism) -> Outcome {
    let (m, n) = (g0.source(), g0.target());
    let (p, q) = (resolve_module(m), resolve_module(n));
    let f = lift_morphism(g0, &p, &q)?;
    ensure(f.is_chain_map(), "the lift is not a chain map")?;
    let t = lift_triple(g0, &p, &q)?;
    ensure(t.tau.is_quasi_iso(), "the roof leg is not a quasi-isomorphism")?;
    let roof = normalize_roof(&t.tau, &t.gamma)?;
    ensure(find_homotopy(&f, &roof.map)?.is_some(), "independent lifts are not homotopic")?;

    let z = Zeta::new();
    let lhs = z.morphism(&g1.after(g0));
    let rhs = z.morphism(g1).after(&z.morphism(g0));
    ensure(are_homotopic(&lhs, &rhs), "ζ(g₁g₀) is not homotopic to ζ(g₁)ζ(g₀)")?;

    let gamma = pullback_complexes(&p, &resolve_presentation(m), &Morphism::identity(m))?;
    ensure(gamma.tau.is_quasi_iso() && gamma.gamma.is_quasi_iso(), "a leg of Γ is not a quasi-isomorphism")?;
    Ok(json!({ "lift_length": p.length(), "gamma_rank": gamma.l.total_rank() }))
}

fn witt_map(f: &ModuleForm, w: &ModuleLagrangian) -> Outcome {
    w.validate(f)?;
    let z = zeta_form(f)?;
    let defect = z.symmetry_defect();
    let zero = devissage::complexes::ChainMap::zero(&z.complex, &z.target());
    ensure(z.symmetry.witnesses(&defect, &zero), "ζ(φ) is not symmetric up to the recorded homotopy")?;
    ensure(null_homotopy(&defect)?.is_some(), "no independent homotopy φ* ≃ εφ")?;
    let t = build_lagrangian_lift(f, w)?;
    ensure(t.s.is_quasi_iso(), "the comparison to the cone is not a quasi-isomorphism")?;
    let d = f.d();
    let wd = dual_map(&t.w, d, Convention::Unsigned).translate(-1, true);
    let wd = devissage::complexes::ChainMap::new(t.w.source().clone(), t.w.target().clone(), wd.components())?;
    ensure(t.symmetry.witnesses(&wd, &t.w), "T^{-1}w^# ≄ w")?;
    ensure(null_homotopy(&wd.sub(&t.w))?.is_some(), "no independent homotopy T^{-1}w^# ≃ w")?;
    Ok(json!({ "cone_rank": t.cone.total_rank() }))
}

/// Per-prime isometry invariants; over a field or a local ring the form is
/// its own single part.
fn primary_invariants(f: &ModuleForm) -> Result<Vec<(u64, IsometryInvariants)>, Error> {
    if f.d() == 0 || f.ring().prime().is_some() {
        return Ok(vec![(f.ring().prime().unwrap_or(0), isometry_invariants(f)?)]);
    }
    decompose_form(f)?.parts.iter().map(|p| Ok((p.prime, isometry_invariants(&p.form)?))).collect()
}

fn devissage_round_trip(seed: &ModuleForm, c: &ComplexForm, q: &devissage::complexes::ChainMap) -> Outcome {
    let red = reduce_support(c, ReduceOptions { verify: true })?;
    ensure(red.validated(), "the reduction ledger does not validate")?;
    let iso = red.isometry.as_ref().ok_or_else(|| Failure { reason: "no isometry was recorded".into(), error: None })?;
    let g = induced_module_isometry(&q.after(&iso.map), &red.extracted, seed)?;
    ensure(g.is_iso(), "the induced module map is not an isomorphism")?;
    ensure(isometry_invariants(&red.extracted)? == isometry_invariants(seed)?, "isometry invariants differ")?;
    ensure(primary_invariants(&red.extracted)? == primary_invariants(seed)?, "primary parts are not isometric")?;
    Ok(json!({
        "surgeries": red.surgery_count(),
        "steps": red.ledger.len(),
        "window": c.homology_window(),
    }))
}

fn spread(seed: &ModuleForm, c: &ComplexForm) -> Outcome {
    let red = reduce_support(c, ReduceOptions { verify: true })?;
    ensure(red.validated(), "the reduction ledger does not validate")?;
    ensure(red.surgery_count() >= 1, "a hyperbolic summand off degree 0 was not removed by surgery")?;
    ensure(witt_class(&red.extracted)? == witt_class(seed)?, "the Witt class changed")?;
    Ok(json!({ "surgeries": red.surgery_count(), "steps": red.ledger.len() }))
}

fn decomposition(form: &FormJson) -> Outcome {
    let f = form.to_form()?;
    let dec = decompose_form(&f)?;
    ensure(dec.orthogonal, "p-parts are not orthogonal")?;
    ensure(dec.complete, "p-parts do not exhaust the module")?;
    ensure(dec.localization_commutes, "duality does not commute with localization")?;
    ensure(dec.invariants_match, "localized invariants do not match")?;
    let mut joined: Vec<JordanBlock> = vec![];
    for p in &dec.parts {
        joined.extend(jordan_invariants(&p.form)?);
    }
    joined.sort();
    ensure(joined == jordan_invariants(&f)?, "Jordan multisets differ")?;
    Ok(json!({ "primes": dec.parts.iter().map(|p| p.prime).collect::<Vec<_>>() }))
}

fn witt_base(ring: Ring, left: &[i64], right: &[i64]) -> Outcome {
    let p = ring.prime().ok_or_else(|| Error::UnsupportedRing(ring.descriptor()))? as i64;
    let engine = |v: &[i64]| -> Result<FieldInvariants, Error> {
        let s = Matrix::from_fn(ring, v.len(), v.len(), |i, j| if i == j { ring.int(v[i]) } else { ring.zero() });
        witt_invariants_d0(&form_from_gram(&s, 1)?)
    };
    let (a, b) = (engine(left)?, engine(right)?);
    let (ka, kb) = (diagonal_kernel(p, left), diagonal_kernel(p, right));
    ensure(a.is_zero_class() == (ka == AnisotropicKernel::Zero), format!("zero class disagrees for {left:?}"))?;
    ensure(b.is_zero_class() == (kb == AnisotropicKernel::Zero), format!("zero class disagrees for {right:?}"))?;
    let same = (a.rank_parity, &a.discriminant) == (b.rank_parity, &b.discriminant);
    ensure(same == (ka == kb), format!("classification of {left:?} and {right:?} disagrees with the oracle"))?;
    Ok(json!({ "equivalent": same }))
}
