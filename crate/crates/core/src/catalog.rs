//! JSON catalog of charts, patches and fields, and the configurations built from it.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curvilinear3d::{AffineChart, Chart3, CylindricalChart, IdentityChart, PerturbedChart};
use crate::energy::EnergyParams;
use crate::error::{Error, Result};
use crate::field::{BoxDomain, Deriv, DynField, Field, FnField, Linear, RotationField2, RotationField3};
use crate::scalar::Real;
use crate::surface::{Cylinder, Graph, Plane, Sphere, SurfacePatch, TiltedPlane};
use crate::tensor::{Mat3, Quat, Vec3};

/// Version tag every configuration and report carries.
pub const SCHEMA: &str = "cosserat-curvature/1";

/// Highest total degree of a polynomial term.
pub const MAX_DEGREE: u32 = 3;

fn schema_err(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

/// Parses `text` as `C`, reporting failures with a JSON pointer.
pub fn parse<C: for<'de> Deserialize<'de>>(text: &str) -> Result<C> {
    let mut de = serde_json::Deserializer::from_str(text);
    let out = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let pointer = pointer_of(e.path());
        schema_err(pointer, e.inner().to_string())
    })?;
    de.end().map_err(|e| schema_err("", e.to_string()))?;
    Ok(out)
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    out
}

pub fn check_schema_tag(tag: &str) -> Result<()> {
    if tag == SCHEMA {
        Ok(())
    } else {
        Err(schema_err("/schema", format!("expected \"{SCHEMA}\", got \"{tag}\"")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Box3Spec {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Box2Spec {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

fn box_domain<T: Real, const D: usize>(lo: &[f64; D], hi: &[f64; D], ptr: &str) -> Result<BoxDomain<T, D>> {
    for i in 0..D {
        if !(lo[i] < hi[i]) || !lo[i].is_finite() || !hi[i].is_finite() {
            return Err(schema_err(format!("{ptr}/hi/{i}"), "domain needs finite lo < hi"));
        }
    }
    Ok(BoxDomain::new(lo.map(T::lit), hi.map(T::lit)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Identity,
    Affine,
    Cylindrical,
    Perturbed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub kind: ChartKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Box3Spec>,
}

impl ChartSpec {
    pub fn of(kind: ChartKind) -> Self {
        ChartSpec {
            kind,
            scale: None,
            amplitude: None,
            domain: None,
        }
    }

    pub fn build<T: Real>(&self, ptr: &str) -> Result<Arc<dyn Chart3<T>>> {
        let domain = |default: BoxDomain<T, 3>| match &self.domain {
            Some(d) => box_domain(&d.lo, &d.hi, &format!("{ptr}/domain")),
            None => Ok(default),
        };
        Ok(match self.kind {
            ChartKind::Identity => Arc::new(IdentityChart {
                domain: domain(BoxDomain::unit())?,
            }),
            ChartKind::Affine => {
                let s = self.scale.unwrap_or([2.0, 3.0, 1.0]);
                if s.iter().any(|v| !(*v > 0.0)) {
                    return Err(schema_err(format!("{ptr}/scale"), "affine scales must be positive"));
                }
                Arc::new(AffineChart {
                    scale: s.map(T::lit),
                    domain: domain(BoxDomain::unit())?,
                })
            }
            ChartKind::Cylindrical => {
                let d = domain(CylindricalChart::default().domain)?;
                if d.lo[0] <= T::zero() {
                    return Err(schema_err(
                        format!("{ptr}/domain/lo/0"),
                        "cylindrical chart needs x₁ > 0",
                    ));
                }
                Arc::new(CylindricalChart { domain: d })
            }
            ChartKind::Perturbed => {
                let a = self.amplitude.unwrap_or(0.1);
                if !(a.abs() < 0.5) {
                    return Err(schema_err(
                        format!("{ptr}/amplitude"),
                        "perturbation amplitude must be below 0.5",
                    ));
                }
                Arc::new(PerturbedChart {
                    amplitude: T::lit(a),
                    domain: domain(BoxDomain::unit())?,
                })
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchKind {
    Plane,
    TiltedPlane,
    Cylinder,
    Sphere,
    Graph,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    pub kind: PatchKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Box2Spec>,
}

impl PatchSpec {
    pub fn of(kind: PatchKind) -> Self {
        PatchSpec {
            kind,
            radius: None,
            amplitude: None,
            u: None,
            v: None,
            domain: None,
        }
    }

    pub fn build<T: Real>(&self, ptr: &str) -> Result<Arc<dyn SurfacePatch<T>>> {
        let domain = |default: BoxDomain<T, 2>| match &self.domain {
            Some(d) => box_domain(&d.lo, &d.hi, &format!("{ptr}/domain")),
            None => Ok(default),
        };
        let radius = |default: f64| {
            let r = self.radius.unwrap_or(default);
            if r > 0.0 && r.is_finite() {
                Ok(T::lit(r))
            } else {
                Err(schema_err(format!("{ptr}/radius"), "radius must be positive"))
            }
        };
        Ok(match self.kind {
            PatchKind::Plane => Arc::new(Plane {
                domain: domain(BoxDomain::unit())?,
            }),
            PatchKind::TiltedPlane => {
                let def = TiltedPlane::<T>::default();
                let u = self.u.map(Vec3::from_f64).unwrap_or(def.u);
                let v = self.v.map(Vec3::from_f64).unwrap_or(def.v);
                if u.cross(v).norm() <= T::lit(1e-12) {
                    return Err(schema_err(format!("{ptr}/v"), "u and v must be independent"));
                }
                Arc::new(TiltedPlane {
                    u,
                    v,
                    domain: domain(def.domain)?,
                })
            }
            PatchKind::Cylinder => Arc::new(Cylinder {
                radius: radius(2.0)?,
                domain: domain(Cylinder::<T>::default().domain)?,
            }),
            PatchKind::Sphere => {
                let d = domain(Sphere::<T>::default().domain)?;
                let half_pi = T::FRAC_PI_2();
                if d.lo[1] <= -half_pi || d.hi[1] >= half_pi {
                    return Err(schema_err(
                        format!("{ptr}/domain"),
                        "sphere patch must exclude the poles",
                    ));
                }
                Arc::new(Sphere {
                    radius: radius(1.0)?,
                    domain: d,
                })
            }
            PatchKind::Graph => Arc::new(Graph {
                amplitude: T::lit(self.amplitude.unwrap_or(0.2)),
                domain: domain(Graph::<T>::default().domain)?,
            }),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleKind {
    Linear,
    Sin,
}

/// `θ = c xᵢ` or `θ = A sin(c xᵢ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleSpec {
    pub kind: AngleKind,
    pub c: f64,
    pub coord: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

impl AngleSpec {
    pub fn linear(c: f64, coord: usize) -> Self {
        AngleSpec {
            kind: AngleKind::Linear,
            c,
            coord,
            amplitude: None,
        }
    }

    pub fn sine(amplitude: f64, c: f64, coord: usize) -> Self {
        AngleSpec {
            kind: AngleKind::Sin,
            c,
            coord,
            amplitude: Some(amplitude),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationKind {
    Constant,
    AxisAngle,
    Composed,
}

/// Rotation field; `composed` multiplies its factors left to right.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationSpec {
    pub kind: RotationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<[f64; 3]>,
    /// Fixed angle of a `constant` rotation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_fn: Option<AngleSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<RotationSpec>,
}

impl RotationSpec {
    pub fn identity() -> Self {
        RotationSpec {
            kind: RotationKind::Constant,
            axis: None,
            angle: None,
            angle_fn: None,
            factors: Vec::new(),
        }
    }

    pub fn constant(axis: [f64; 3], angle: f64) -> Self {
        RotationSpec {
            axis: Some(axis),
            angle: Some(angle),
            ..Self::identity()
        }
    }

    pub fn axis_angle(axis: [f64; 3], angle_fn: AngleSpec) -> Self {
        RotationSpec {
            kind: RotationKind::AxisAngle,
            axis: Some(axis),
            angle_fn: Some(angle_fn),
            ..Self::identity()
        }
    }

    pub fn composed(factors: Vec<RotationSpec>) -> Self {
        RotationSpec {
            kind: RotationKind::Composed,
            factors,
            ..Self::identity()
        }
    }

    fn flatten<T: Real>(&self, dim: usize, ptr: &str, out: &mut Vec<RotationFactor<T>>) -> Result<()> {
        let axis = |required: bool| -> Result<Option<Vec3<T>>> {
            match self.axis {
                Some(a) => {
                    let v = Vec3::from_f64(a);
                    let n = v.norm();
                    if !(n > T::lit(1e-12)) || !v.is_finite() {
                        return Err(schema_err(
                            format!("{ptr}/axis"),
                            "axis must be a nonzero finite vector",
                        ));
                    }
                    Ok(Some(v.scale(T::one() / n)))
                }
                None if required => Err(schema_err(format!("{ptr}/axis"), "axis is required")),
                None => Ok(None),
            }
        };
        match self.kind {
            RotationKind::Constant => {
                let angle = self.angle.unwrap_or(0.0);
                if let Some(a) = axis(self.angle.is_some_and(|x| x != 0.0))? {
                    out.push(RotationFactor {
                        axis: a,
                        angle: Angle::Const(T::lit(angle)),
                    });
                }
            }
            RotationKind::AxisAngle => {
                let a = axis(true)?.expect("required");
                let f = self
                    .angle_fn
                    .ok_or_else(|| schema_err(format!("{ptr}/angle_fn"), "axis_angle needs angle_fn"))?;
                if f.coord >= dim {
                    return Err(schema_err(
                        format!("{ptr}/angle_fn/coord"),
                        format!("coordinate index {} out of range for {dim} parameters", f.coord),
                    ));
                }
                let (c, amp) = (T::lit(f.c), T::lit(f.amplitude.unwrap_or(1.0)));
                let angle = match f.kind {
                    AngleKind::Linear => Angle::Linear { c, coord: f.coord },
                    AngleKind::Sin => Angle::Sin { amp, c, coord: f.coord },
                };
                out.push(RotationFactor { axis: a, angle });
            }
            RotationKind::Composed => {
                if self.factors.is_empty() {
                    return Err(schema_err(format!("{ptr}/factors"), "composed rotation needs factors"));
                }
                for (i, f) in self.factors.iter().enumerate() {
                    f.flatten(dim, &format!("{ptr}/factors/{i}"), out)?;
                }
            }
        }
        Ok(())
    }

    pub fn build<T: Real, const D: usize>(&self, ptr: &str) -> Result<AxisAngleField<T, D>> {
        let mut factors = Vec::new();
        self.flatten(D, ptr, &mut factors)?;
        Ok(AxisAngleField { factors })
    }

    pub fn build3<T: Real>(&self, ptr: &str) -> Result<RotationField3<T>> {
        Ok(Arc::new(self.build::<T, 3>(ptr)?))
    }

    pub fn build2<T: Real>(&self, ptr: &str) -> Result<RotationField2<T>> {
        Ok(Arc::new(self.build::<T, 2>(ptr)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Angle<T> {
    Const(T),
    Linear { c: T, coord: usize },
    Sin { amp: T, c: T, coord: usize },
}

impl<T: Real> Angle<T> {
    fn value(&self, x: &[T]) -> T {
        match *self {
            Angle::Const(a) => a,
            Angle::Linear { c, coord } => c * x[coord],
            Angle::Sin { amp, c, coord } => amp * (c * x[coord]).sin(),
        }
    }

    fn partial(&self, x: &[T], i: usize) -> T {
        match *self {
            Angle::Linear { c, coord } if coord == i => c,
            Angle::Sin { amp, c, coord } if coord == i => amp * c * (c * x[coord]).cos(),
            _ => T::zero(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct RotationFactor<T> {
    axis: Vec3<T>,
    angle: Angle<T>,
}

/// Product `∏ₖ exp(θₖ(x) [nₖ]×)`, evaluated through unit quaternions.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisAngleField<T, const D: usize> {
    factors: Vec<RotationFactor<T>>,
}

impl<T: Real, const D: usize> AxisAngleField<T, D> {
    fn factor_mats(&self, x: &[T; D]) -> Vec<Mat3<T>> {
        self.factors
            .iter()
            .map(|f| Quat::from_axis_angle(f.axis, f.angle.value(x)).to_mat())
            .collect()
    }

    pub fn quaternion(&self, x: &[T; D]) -> Quat<T> {
        self.factors.iter().fold(Quat::identity(), |q, f| {
            q.mul(&Quat::from_axis_angle(f.axis, f.angle.value(x))).normalized()
        })
    }
}

impl<T: Real, const D: usize> Field<T, D> for AxisAngleField<T, D> {
    type Value = Mat3<T>;

    fn value(&self, x: &[T; D]) -> Mat3<T> {
        self.quaternion(x).to_mat()
    }

    fn partial(&self, x: &[T; D], i: usize) -> Option<Mat3<T>> {
        let mats = self.factor_mats(x);
        let n = mats.len();
        // suffix[k] = Qₖ Qₖ₊₁ ⋯
        let mut suffix = vec![Mat3::identity(); n + 1];
        for k in (0..n).rev() {
            suffix[k] = mats[k] * suffix[k + 1];
        }
        let mut prefix = Mat3::identity();
        let mut out = Mat3::zero();
        for k in 0..n {
            let dtheta = self.factors[k].angle.partial(x, i);
            if dtheta != T::zero() {
                let dq = self.factors[k].axis.scale(dtheta).cross_tensor(&suffix[k]);
                out += prefix * dq;
            }
            prefix = prefix * mats[k];
        }
        Some(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VecTerm {
    pub coeff: [f64; 3],
    pub powers: [u32; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatTerm {
    pub coeff: [[f64; 3]; 3],
    pub powers: [u32; 3],
}

/// `reference` adds the chart or patch map; `terms` are monomials `c x^p`.
///
/// Shell fields ignore the third power, which must be zero.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorSpec {
    #[serde(default)]
    pub reference: bool,
    #[serde(default)]
    pub terms: Vec<VecTerm>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorSpec {
    #[serde(default)]
    pub terms: Vec<MatTerm>,
}

fn check_powers(powers: &[u32; 3], dim: usize, ptr: &str) -> Result<()> {
    if powers.iter().sum::<u32>() > MAX_DEGREE {
        return Err(schema_err(
            format!("{ptr}/powers"),
            format!("total degree exceeds {MAX_DEGREE}"),
        ));
    }
    if powers[dim..].iter().any(|p| *p != 0) {
        return Err(schema_err(
            format!("{ptr}/powers"),
            format!("only {dim} parameters available"),
        ));
    }
    Ok(())
}

/// Sum of monomials `c x₁^p₁ x₂^p₂ ⋯`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyField<V, const D: usize> {
    pub terms: Vec<(V, [u32; D])>,
}

fn monomial<T: Real, const D: usize>(x: &[T; D], p: &[u32; D]) -> T {
    (0..D).fold(T::one(), |acc, i| acc * x[i].powi(p[i] as i32))
}

fn monomial_partial<T: Real, const D: usize>(x: &[T; D], p: &[u32; D], i: usize) -> T {
    if p[i] == 0 {
        return T::zero();
    }
    let mut q = *p;
    q[i] -= 1;
    T::lit(p[i] as f64) * monomial(x, &q)
}

impl<T: Real, V: Linear<T>, const D: usize> Field<T, D> for PolyField<V, D> {
    type Value = V;

    fn value(&self, x: &[T; D]) -> V {
        self.terms
            .iter()
            .fold(V::zero(), |acc, (c, p)| acc.add(c.scale(monomial(x, p))))
    }

    fn partial(&self, x: &[T; D], i: usize) -> Option<V> {
        Some(
            self.terms
                .iter()
                .fold(V::zero(), |acc, (c, p)| acc.add(c.scale(monomial_partial(x, p, i)))),
        )
    }
}

impl VectorSpec {
    fn poly<T: Real, const D: usize>(&self, ptr: &str) -> Result<PolyField<Vec3<T>, D>> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (k, t) in self.terms.iter().enumerate() {
            check_powers(&t.powers, D, &format!("{ptr}/terms/{k}"))?;
            terms.push((Vec3::from_f64(t.coeff), std::array::from_fn(|i| t.powers[i])));
        }
        Ok(PolyField { terms })
    }

    pub fn build3<T: Real>(&self, chart: &Arc<dyn Chart3<T>>, ptr: &str) -> Result<DynField<T, 3, Vec3<T>>> {
        let poly = self.poly::<T, 3>(ptr)?;
        if !self.reference {
            return Ok(Arc::new(poly));
        }
        let (c1, c2) = (chart.clone(), chart.clone());
        let (p1, p2) = (Arc::new(poly), Arc::new(self.poly::<T, 3>(ptr)?));
        Ok(Arc::new(FnField::with_partial(
            move |x: &[T; 3]| c1.map(x) + p1.value(x),
            move |x: &[T; 3], i| match (c2.tangent(x, i), p2.partial(x, i)) {
                (Some(t), Some(p)) => t + p,
                // no analytic tangent: NaN makes the misuse visible
                _ => Vec3::new(T::nan(), T::nan(), T::nan()),
            },
        )))
    }

    pub fn build2<T: Real>(&self, patch: &Arc<dyn SurfacePatch<T>>, ptr: &str) -> Result<DynField<T, 2, Vec3<T>>> {
        let poly = Arc::new(self.poly::<T, 2>(ptr)?);
        if !self.reference {
            return Ok(poly);
        }
        let (s1, s2) = (patch.clone(), patch.clone());
        let p2 = poly.clone();
        Ok(Arc::new(FnField::with_partial(
            move |x: &[T; 2]| s1.map(x) + poly.value(x),
            move |x: &[T; 2], i| match (s2.tangent(x, i), p2.partial(x, i)) {
                (Some(t), Some(p)) => t + p,
                _ => Vec3::new(T::nan(), T::nan(), T::nan()),
            },
        )))
    }
}

impl TensorSpec {
    pub fn build<T: Real, const D: usize>(&self, ptr: &str) -> Result<PolyField<Mat3<T>, D>> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (k, t) in self.terms.iter().enumerate() {
            check_powers(&t.powers, D, &format!("{ptr}/terms/{k}"))?;
            terms.push((Mat3::from_f64(t.coeff), std::array::from_fn(|i| t.powers[i])));
        }
        Ok(PolyField { terms })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivSpec {
    #[default]
    Analytic,
    Fd,
}

impl DerivSpec {
    pub fn build<T: Real>(&self, step: Option<f64>) -> Deriv<T> {
        match self {
            DerivSpec::Analytic => Deriv::Analytic,
            DerivSpec::Fd => Deriv::CentralFd { step: step.map(T::lit) },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub mu: f64,
    pub kappa: f64,
    pub mu_c: f64,
    pub lc: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    #[serde(default = "two")]
    pub p: f64,
}

fn two() -> f64 {
    2.0
}

impl Default for ParamsSpec {
    fn default() -> Self {
        ParamsSpec {
            mu: 1.0,
            kappa: 1.0,
            mu_c: 1.0,
            lc: 1.0,
            a1: 1.0,
            a2: 1.0,
            a3: 1.0,
            p: 2.0,
        }
    }
}

impl ParamsSpec {
    pub fn build<T: Real>(&self) -> Result<EnergyParams<T>> {
        EnergyParams::new(
            T::lit(self.mu),
            T::lit(self.kappa),
            T::lit(self.mu_c),
            T::lit(self.lc),
            T::lit(self.a1),
            T::lit(self.a2),
            T::lit(self.a3),
            T::lit(self.p),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigKind {
    Body,
    Shell,
}

/// Input of `eval`: a three-dimensional body (`chart`) or a shell (`patch`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub schema: String,
    pub kind: ConfigKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<PatchSpec>,
    pub deformation: VectorSpec,
    pub rotation: RotationSpec,
    /// Absent: `1₃` for a body, the polar frame rotation for a shell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_rotation: Option<RotationSpec>,
    #[serde(default)]
    pub derivatives: DerivSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    X1Lo,
    X1Hi,
    X2Lo,
    X2Hi,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::X1Lo, Edge::X1Hi, Edge::X2Lo, Edge::X2Hi];

    pub fn contains(&self, i: usize, j: usize, n1: usize, n2: usize) -> bool {
        match self {
            Edge::X1Lo => i == 0,
            Edge::X1Hi => i + 1 == n1,
            Edge::X2Lo => j == 0,
            Edge::X2Hi => j + 1 == n2,
        }
    }
}

fn all_edges() -> Vec<Edge> {
    Edge::ALL.to_vec()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n1: usize,
    pub n2: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSpec {
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_max_iter() -> usize {
    5000
}

fn default_grad_tol() -> f64 {
    1e-8
}

fn default_seed() -> u64 {
    1
}

impl Default for OptionsSpec {
    fn default() -> Self {
        OptionsSpec {
            max_iter: default_max_iter(),
            grad_tol: default_grad_tol(),
            seed: default_seed(),
        }
    }
}

/// Input of `minimize`: clamped, load-free relaxation of a perturbed reference state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeConfig {
    pub schema: String,
    pub patch: PatchSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub params: ParamsSpec,
    /// Edges where both `m` and `Qₑ` are held at the reference state.
    #[serde(default = "all_edges")]
    pub clamp: Vec<Edge>,
    /// Rotation angle of the seeded perturbation of free nodes.
    #[serde(default)]
    pub perturbation: f64,
    #[serde(default)]
    pub options: OptionsSpec,
}

/// The named families the validation suites sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub charts: BTreeMap<String, ChartSpec>,
    pub patches: BTreeMap<String, PatchSpec>,
    /// Fields over the first two (shell) or all three (body) parameters.
    pub rotations: BTreeMap<String, RotationSpec>,
    pub vectors: BTreeMap<String, VectorSpec>,
    pub tensors: BTreeMap<String, TensorSpec>,
}

fn vterm(coeff: [f64; 3], powers: [u32; 3]) -> VecTerm {
    VecTerm { coeff, powers }
}

fn mterm(coeff: [[f64; 3]; 3], powers: [u32; 3]) -> MatTerm {
    MatTerm { coeff, powers }
}

impl Catalog {
    pub fn builtin() -> Self {
        let charts = [
            ("identity", ChartSpec::of(ChartKind::Identity)),
            (
                "affine",
                ChartSpec {
                    scale: Some([2.0, 3.0, 1.0]),
                    ..ChartSpec::of(ChartKind::Affine)
                },
            ),
            ("cylindrical", ChartSpec::of(ChartKind::Cylindrical)),
            (
                "perturbed",
                ChartSpec {
                    amplitude: Some(0.1),
                    ..ChartSpec::of(ChartKind::Perturbed)
                },
            ),
        ];
        let patches = [
            ("plane", PatchSpec::of(PatchKind::Plane)),
            ("tilted_plane", PatchSpec::of(PatchKind::TiltedPlane)),
            (
                "cylinder",
                PatchSpec {
                    radius: Some(2.0),
                    ..PatchSpec::of(PatchKind::Cylinder)
                },
            ),
            (
                "sphere",
                PatchSpec {
                    radius: Some(1.0),
                    ..PatchSpec::of(PatchKind::Sphere)
                },
            ),
            (
                "graph",
                PatchSpec {
                    amplitude: Some(0.2),
                    ..PatchSpec::of(PatchKind::Graph)
                },
            ),
        ];
        let lin = AngleSpec::linear;
        let sin = |c, coord| AngleSpec::sine(0.8, c, coord);
        let rotations = [
            ("constant", RotationSpec::constant([1.0, 2.0, 2.0], 0.7)),
            ("linear", RotationSpec::axis_angle([0.3, -0.5, 1.0], lin(1.3, 0))),
            ("sine", RotationSpec::axis_angle([1.0, 0.4, -0.2], sin(1.7, 1))),
            (
                "composed",
                RotationSpec::composed(vec![
                    RotationSpec::axis_angle([0.0, 0.0, 1.0], lin(0.9, 0)),
                    RotationSpec::axis_angle([1.0, 1.0, 0.0], sin(1.1, 1)),
                    RotationSpec::axis_angle([0.2, 1.0, 0.5], lin(-0.6, 2)),
                    RotationSpec::constant([1.0, -1.0, 0.5], 0.4),
                ]),
            ),
        ];
        let vectors = [
            (
                "stretch",
                VectorSpec {
                    reference: true,
                    terms: vec![
                        vterm([0.3, 0.0, 0.1], [0, 1, 0]),
                        vterm([0.0, -0.2, 0.15], [1, 1, 0]),
                        vterm([0.05, 0.1, -0.1], [2, 0, 0]),
                        vterm([0.02, 0.0, 0.04], [0, 2, 1]),
                    ],
                },
            ),
            (
                "swirl",
                VectorSpec {
                    reference: false,
                    terms: vec![
                        vterm([-1.0, 0.0, 0.0], [0, 1, 0]),
                        vterm([0.0, 1.0, 0.0], [1, 0, 0]),
                        vterm([0.2, 0.3, -0.4], [1, 1, 1]),
                        vterm([0.5, -0.1, 0.3], [0, 0, 2]),
                    ],
                },
            ),
        ];
        let tensors = [(
            "cubic",
            TensorSpec {
                terms: vec![
                    mterm([[1.0, 0.2, -0.3], [0.0, 0.5, 0.1], [0.4, 0.0, 1.0]], [0, 0, 0]),
                    mterm([[0.0, 1.0, 0.0], [-0.5, 0.0, 0.3], [0.2, 0.1, 0.0]], [1, 0, 0]),
                    mterm([[0.3, 0.0, 0.7], [0.0, -0.4, 0.0], [0.1, 0.6, 0.2]], [0, 1, 1]),
                    mterm([[-0.2, 0.5, 0.0], [0.3, 0.1, -0.6], [0.0, 0.2, 0.4]], [2, 1, 0]),
                    mterm([[0.1, 0.0, 0.2], [0.0, 0.3, 0.0], [-0.3, 0.0, 0.1]], [0, 0, 3]),
                ],
            },
        )];
        let own = |s: &str| s.to_string();
        Catalog {
            charts: charts.into_iter().map(|(k, v)| (own(k), v)).collect(),
            patches: patches.into_iter().map(|(k, v)| (own(k), v)).collect(),
            rotations: rotations.into_iter().map(|(k, v)| (own(k), v)).collect(),
            vectors: vectors.into_iter().map(|(k, v)| (own(k), v)).collect(),
            tensors: tensors.into_iter().map(|(k, v)| (own(k), v)).collect(),
        }
    }

    /// Rotation field whose third parameter is ignored, for shells.
    pub fn shell_rotation(&self, name: &str) -> Option<RotationSpec> {
        let mut spec = self.rotations.get(name)?.clone();
        fn strip(s: &mut RotationSpec) {
            if let Some(f) = &mut s.angle_fn {
                if f.coord == 2 {
                    f.coord = 0;
                }
            }
            s.factors.iter_mut().for_each(strip);
        }
        strip(&mut spec);
        Some(spec)
    }

    /// Vector or tensor terms restricted to the first two parameters.
    pub fn shell_vector(&self, name: &str) -> Option<VectorSpec> {
        let mut spec = self.vectors.get(name)?.clone();
        for t in &mut spec.terms {
            t.powers[2] = 0;
        }
        Some(spec)
    }

    pub fn shell_tensor(&self, name: &str) -> Option<TensorSpec> {
        let mut spec = self.tensors.get(name)?.clone();
        for t in &mut spec.terms {
            t.powers[2] = 0;
        }
        Some(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{jet, Deriv};

    #[test]
    fn builtin_catalog_builds() {
        let cat = Catalog::builtin();
        for (name, c) in &cat.charts {
            c.build::<f64>(&format!("/charts/{name}")).unwrap();
        }
        for (name, p) in &cat.patches {
            p.build::<f64>(&format!("/patches/{name}")).unwrap();
        }
        for name in cat.rotations.keys() {
            cat.rotations[name].build3::<f64>("/r").unwrap();
            cat.shell_rotation(name).unwrap().build2::<f64>("/r").unwrap();
        }
    }

    #[test]
    fn rotation_partials_match_differences() {
        let cat = Catalog::builtin();
        let x = [0.3, 0.6, 0.45];
        for spec in cat.rotations.values() {
            let f = spec.build::<f64, 3>("").unwrap();
            let a = jet(&f, &x, Deriv::Analytic).unwrap();
            let n = jet(&f, &x, Deriv::fd()).unwrap();
            assert!(a.value.orthogonality_defect() < 1e-14);
            for i in 0..3 {
                assert!((a.d[i] - n.d[i]).max_abs() < 1e-8);
            }
        }
    }

    #[test]
    fn polynomial_partials() {
        let v = Catalog::builtin().tensors["cubic"].build::<f64, 3>("").unwrap();
        let x = [0.2, 0.7, 0.4];
        let a = jet(&v, &x, Deriv::Analytic).unwrap();
        let n = jet(&v, &x, Deriv::fd()).unwrap();
        for i in 0..3 {
            assert!((a.d[i] - n.d[i]).max_abs() < 1e-8);
        }
    }

    #[test]
    fn schema_errors_carry_pointers() {
        let bad = r#"{"schema":"cosserat-curvature/1","kind":"body","chart":{"kind":"affine","scale":[1,"x",1]},
            "deformation":{},"rotation":{"kind":"constant"}}"#;
        match parse::<EvalConfig>(bad) {
            Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/chart/scale/1"),
            other => panic!("unexpected {other:?}"),
        }
        let spec = RotationSpec::axis_angle(
            [0.0, 0.0, 1.0],
            AngleSpec {
                kind: AngleKind::Linear,
                c: 1.0,
                coord: 2,
                amplitude: None,
            },
        );
        match spec.build2::<f64>("/rotation") {
            Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, "/rotation/angle_fn/coord"),
            _ => panic!("coordinate range not checked"),
        }
        assert!(matches!(check_schema_tag("v0"), Err(Error::Schema { .. })));
    }
}
