//! Wire types for generated instances. Every instance carries its ring, so a
//! payload alone is enough to replay a trial.

use devissage::complexes::{ChainMap, ChainMapJson, Complex, ComplexJson, ModuleComplex};
use devissage::linalg::MatrixJson;
use devissage::modules::{Module, Morphism};
use devissage::resolution::Resolution;
use devissage::witt::{AObject, ComplexForm, ComplexFormJson, Convention, ModuleForm, ModuleLagrangian};
use devissage::{Error, Matrix, Result, Ring};
use serde::{Deserialize, Serialize};

/// A module of `𝒜` with the resolution its duals are computed from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObjectJson {
    pub module: Module,
    pub resolution: ComplexJson,
    pub augmentation: MatrixJson,
}

impl ObjectJson {
    pub fn from_object(x: &AObject) -> ObjectJson {
        ObjectJson {
            module: x.module.clone(),
            resolution: x.resolution.complex.to_json(),
            augmentation: x.resolution.augmentation.matrix().to_json(),
        }
    }

    pub fn to_object(&self) -> Result<AObject> {
        let ring = self.module.ring();
        let complex = Complex::from_json(&self.resolution)?;
        let aug = Matrix::from_json(ring, &self.augmentation)?;
        AObject::with_resolution(Resolution::new(self.module.clone(), complex, aug)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormJson {
    pub object: ObjectJson,
    pub phi: MatrixJson,
    pub epsilon: i64,
    pub convention: Convention,
}

impl FormJson {
    pub fn from_form(f: &ModuleForm) -> FormJson {
        FormJson {
            object: ObjectJson::from_object(&f.object),
            phi: f.phi.matrix().to_json(),
            epsilon: f.epsilon,
            convention: f.convention,
        }
    }

    pub fn to_form(&self) -> Result<ModuleForm> {
        let object = self.object.to_object()?;
        let phi = Matrix::from_json(object.ring(), &self.phi)?;
        ModuleForm::new(object, phi, self.epsilon, self.convention)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LagrangianJson {
    pub sub: ObjectJson,
    pub alpha: MatrixJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModuleComplexJson {
    pub lo: i64,
    pub objects: Vec<Module>,
    pub differentials: Vec<MatrixJson>,
}

impl ModuleComplexJson {
    pub fn from_complex(c: &ModuleComplex) -> ModuleComplexJson {
        let (lo, hi) = c.bounds();
        ModuleComplexJson {
            lo,
            objects: (lo..=hi).map(|k| c.object(k)).collect(),
            differentials: (lo + 1..=hi).map(|k| c.d(k).matrix().to_json()).collect(),
        }
    }

    pub fn to_complex(&self, ring: Ring) -> Result<ModuleComplex> {
        let mut diffs = Vec::with_capacity(self.differentials.len());
        for (i, m) in self.differentials.iter().enumerate() {
            let (src, tgt) = (self.objects.get(i + 1), self.objects.get(i));
            let (Some(src), Some(tgt)) = (src, tgt) else {
                return Err(Error::ShapeMismatch("more differentials than objects".into()));
            };
            diffs.push(Morphism::new(src.clone(), tgt.clone(), Matrix::from_json(ring, m)?)?);
        }
        ModuleComplex::new(ring, self.lo, self.objects.clone(), diffs)
    }
}

/// One generated instance, tagged by kind.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Instance {
    Module {
        module: Module,
    },
    Morphism {
        source: Module,
        target: Module,
        matrix: MatrixJson,
    },
    /// A bounded free complex with homology in `𝒜`; `map` is an optional
    /// chain map into `target`.
    ComplexInA {
        complex: ComplexJson,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<ComplexJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        map: Option<ChainMapJson>,
    },
    ModuleForm {
        form: FormJson,
    },
    /// `form` is `ζ(seed)` pulled back along the recorded quasi-isomorphism
    /// `quasi_iso: form.complex -> ζ(seed).complex`.
    ComplexForm {
        seed: FormJson,
        form: ComplexFormJson,
        quasi_iso: ChainMapJson,
    },
    NeutralForm {
        form: FormJson,
        lagrangian: LagrangianJson,
    },
    /// Two composable morphisms `M -g0-> N -g1-> L`.
    MorphismPair {
        m: Module,
        n: Module,
        l: Module,
        g0: MatrixJson,
        g1: MatrixJson,
    },
    ModuleComplex {
        ring: Ring,
        complex: ModuleComplexJson,
    },
    /// `seed ⊥ H(T^n ζ(N))`: a complex form Witt-equivalent to `ζ(seed)`
    /// that needs surgery.
    SpreadForm {
        seed: FormJson,
        form: ComplexFormJson,
    },
    /// Two diagonal forms over a prime field.
    DiagonalPair {
        ring: Ring,
        left: Vec<i64>,
        right: Vec<i64>,
    },
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Module { .. } => "module",
            Instance::Morphism { .. } => "morphism",
            Instance::ComplexInA { .. } => "complex-in-a",
            Instance::ModuleForm { .. } => "module-form",
            Instance::ComplexForm { .. } => "complex-form",
            Instance::NeutralForm { .. } => "neutral-form",
            Instance::MorphismPair { .. } => "morphism-pair",
            Instance::ModuleComplex { .. } => "module-complex",
            Instance::SpreadForm { .. } => "spread-form",
            Instance::DiagonalPair { .. } => "diagonal-pair",
        }
    }
}

pub fn complex_form_json(f: &ComplexForm) -> ComplexFormJson {
    f.to_json()
}

pub fn chain_map(source: &Complex, target: &Complex, j: &ChainMapJson) -> Result<ChainMap> {
    ChainMap::from_json(source.clone(), target.clone(), j)
}

pub fn lagrangian(j: &LagrangianJson, form: &ModuleForm) -> Result<ModuleLagrangian> {
    let sub = j.sub.to_object()?;
    let alpha = Matrix::from_json(form.ring(), &j.alpha)?;
    let alpha = Morphism::new(sub.module.clone(), form.object.module.clone(), alpha)?;
    Ok(ModuleLagrangian { sub, alpha })
}
