//! JSON interchange (`"schema": "plk/1"`).
//!
//! Certified values travel as `"num/den"` strings. Floats only appear under keys
//! named `numeric`.

use serde::{Deserialize, Serialize};

use plk_core::geometry::{AffineFunctional, HullDistance, Point};
use plk_core::lift::pipeline::{Audit, CertificateEntry};
use plk_core::lift::{ClosedForm, LiftConfig, LiftFunction, LiftTriangulation, PlTable, TrigTerm};
use plk_core::rational::{format_rational, from_f64_exact, parse_rational, to_f64, Rational};
use plk_core::simplicial::{Complex, DerivedSubdivision, SimplicialMap};

use crate::error::CliError;

pub const SCHEMA: &str = "plk/1";

pub fn rat_str(r: &Rational) -> String {
    format_rational(r)
}

pub fn parse_rat(s: &str) -> Result<Rational, CliError> {
    parse_rational(s).map_err(|e| CliError::Schema(e.to_string()))
}

fn rats(v: &[Rational]) -> Vec<String> {
    v.iter().map(rat_str).collect()
}

fn parse_rats(v: &[String]) -> Result<Vec<Rational>, CliError> {
    v.iter().map(|s| parse_rat(s)).collect()
}

/// Finite floats are written as their exact binary value.
fn exact_f64(v: f64) -> Result<String, CliError> {
    from_f64_exact(v).map(|r| rat_str(&r)).ok_or_else(|| CliError::Schema(format!("non-finite parameter {v}")))
}

fn check_schema(schema: &str) -> Result<(), CliError> {
    if schema != SCHEMA {
        return Err(CliError::Schema(format!("unsupported schema {schema:?}, expected {SCHEMA:?}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDto {
    pub vertices: Vec<Vec<String>>,
    /// Every simplex, in canonical order. Alternatively give `facets`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simplices: Option<Vec<Vec<usize>>>,
    /// Maximal simplices only; faces are added on parse.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_carrier: Option<Vec<usize>>,
}

impl ComplexDto {
    pub fn from_core(c: &Complex) -> Self {
        ComplexDto {
            vertices: c.vertices().iter().map(|p| rats(&p.coords)).collect(),
            simplices: Some(c.simplices().to_vec()),
            facets: None,
            parent_carrier: c.carriers().map(<[usize]>::to_vec),
        }
    }

    pub fn to_core(&self) -> Result<Complex, CliError> {
        let vertices: Vec<Point> = self.vertices.iter().map(|v| parse_rats(v).map(Point::new)).collect::<Result<_, _>>()?;
        if let Some(d) = vertices.first().map(Point::dim) {
            if vertices.iter().any(|p| p.dim() != d) {
                return Err(CliError::Schema("vertices of mixed dimension".into()));
            }
        }
        let n = vertices.len();
        let mut c = match (&self.simplices, &self.facets) {
            (Some(s), None) => Complex::new(vertices, s.clone()),
            (None, Some(f)) => Complex::from_facets(vertices, f),
            _ => return Err(CliError::Schema("a complex needs exactly one of `simplices` or `facets`".into())),
        };
        if c.simplices().iter().flatten().any(|&v| v >= n) {
            return Err(CliError::Schema("simplex refers to a missing vertex".into()));
        }
        if let Some(carriers) = &self.parent_carrier {
            c.set_carriers(carriers.clone())?;
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDto {
    pub source: ComplexDto,
    pub target: ComplexDto,
    pub vertex_map: Vec<usize>,
}

impl MapDto {
    pub fn from_core(f: &SimplicialMap) -> Self {
        MapDto {
            source: ComplexDto::from_core(&f.source),
            target: ComplexDto::from_core(&f.target),
            vertex_map: f.vertex_map.clone(),
        }
    }

    pub fn to_core(&self) -> Result<SimplicialMap, CliError> {
        let target = self.target.to_core()?;
        if self.vertex_map.iter().any(|&w| w >= target.num_vertices()) {
            return Err(CliError::Schema("vertex_map points outside the target".into()));
        }
        Ok(SimplicialMap::new(self.source.to_core()?, target, self.vertex_map.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTermDto {
    pub coef: String,
    pub powers: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub freq: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LiftDto {
    /// A registered closed form, by name.
    ClosedForm { name: String },
    /// `Σ coef · Π x^p · cos(freq·x + phase)` per output; no `freq` means a monomial.
    TrigPoly { input_dim: usize, outputs: Vec<Vec<TrigTermDto>> },
    PlTable { complex: ComplexDto, values: Vec<Vec<String>> },
    Composite { terms: Vec<CompositeTermDto> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositeTermDto {
    pub coef: String,
    pub lift: LiftDto,
}

pub fn closed_form_by_name(name: &str) -> Result<ClosedForm, CliError> {
    match name {
        "absval_example" => Ok(ClosedForm::AbsvalExample),
        "absval_literal" => Ok(ClosedForm::AbsvalLiteral),
        other => Err(CliError::UnknownBuiltin(format!("closed form {other:?}"))),
    }
}

impl LiftDto {
    pub fn from_core(g: &LiftFunction) -> Result<Self, CliError> {
        Ok(match g {
            LiftFunction::ClosedForm(ClosedForm::TrigPoly { input_dim, outputs }) => LiftDto::TrigPoly {
                input_dim: *input_dim,
                outputs: outputs
                    .iter()
                    .map(|terms| terms.iter().map(trig_to_dto).collect::<Result<_, _>>())
                    .collect::<Result<_, _>>()?,
            },
            LiftFunction::ClosedForm(c) => LiftDto::ClosedForm { name: c.name().into() },
            LiftFunction::PlTable(t) => LiftDto::PlTable {
                complex: ComplexDto::from_core(&t.complex),
                values: t.values.iter().map(|v| rats(v)).collect(),
            },
            LiftFunction::Composite(terms) => LiftDto::Composite {
                terms: terms
                    .iter()
                    .map(|(c, g)| Ok(CompositeTermDto { coef: rat_str(c), lift: LiftDto::from_core(g)? }))
                    .collect::<Result<_, CliError>>()?,
            },
        })
    }

    pub fn to_core(&self) -> Result<LiftFunction, CliError> {
        Ok(match self {
            LiftDto::ClosedForm { name } => LiftFunction::ClosedForm(closed_form_by_name(name)?),
            LiftDto::TrigPoly { input_dim, outputs } => {
                let outputs: Vec<Vec<TrigTerm>> = outputs
                    .iter()
                    .map(|terms| terms.iter().map(|t| trig_from_dto(t, *input_dim)).collect::<Result<_, _>>())
                    .collect::<Result<_, _>>()?;
                if outputs.is_empty() {
                    return Err(CliError::Schema("a trig_poly needs at least one output".into()));
                }
                LiftFunction::trig_poly(*input_dim, outputs)
            }
            LiftDto::PlTable { complex, values } => {
                let values = values.iter().map(|v| parse_rats(v)).collect::<Result<_, _>>()?;
                LiftFunction::PlTable(PlTable::new(complex.to_core()?, values)?)
            }
            LiftDto::Composite { terms } => {
                let terms: Vec<(Rational, LiftFunction)> =
                    terms.iter().map(|t| Ok((parse_rat(&t.coef)?, t.lift.to_core()?))).collect::<Result<_, CliError>>()?;
                if terms.is_empty() || terms.iter().any(|(_, g)| g.codim() != terms[0].1.codim()) {
                    return Err(CliError::Schema("composite terms must share their codimension".into()));
                }
                LiftFunction::Composite(terms)
            }
        })
    }
}

fn trig_to_dto(t: &TrigTerm) -> Result<TrigTermDto, CliError> {
    let trig = t.freq.iter().any(|w| *w != 0.0) || t.phase != 0.0;
    Ok(TrigTermDto {
        coef: exact_f64(t.coef)?,
        powers: t.powers.clone(),
        freq: if trig { t.freq.iter().map(|w| exact_f64(*w)).collect::<Result<_, _>>()? } else { Vec::new() },
        phase: if trig { Some(exact_f64(t.phase)?) } else { None },
    })
}

fn trig_from_dto(t: &TrigTermDto, input_dim: usize) -> Result<TrigTerm, CliError> {
    if t.powers.len() != input_dim || (!t.freq.is_empty() && t.freq.len() != input_dim) {
        return Err(CliError::Schema(format!("trig term arity differs from input_dim {input_dim}")));
    }
    let f = |s: &str| parse_rat(s).map(|r| to_f64(&r));
    let coef = f(&t.coef)?;
    if t.freq.is_empty() && t.phase.is_none() {
        return Ok(TrigTerm::monomial(coef, t.powers.clone()));
    }
    let freq = if t.freq.is_empty() { vec![0.0; input_dim] } else { t.freq.iter().map(|w| f(w)).collect::<Result<_, _>>()? };
    let phase = t.phase.as_deref().map(f).transpose()?.unwrap_or(0.0);
    Ok(TrigTerm::trig(coef, t.powers.clone(), freq, phase))
}

/// `f: P → Q` with a lift `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDto {
    pub schema: String,
    pub kind: String,
    pub name: String,
    pub map: MapDto,
    pub lift: LiftDto,
}

impl InstanceDto {
    pub const KIND: &'static str = "instance";

    pub fn new(name: &str, f: &SimplicialMap, g: &LiftFunction) -> Result<Self, CliError> {
        Ok(InstanceDto {
            schema: SCHEMA.into(),
            kind: Self::KIND.into(),
            name: name.into(),
            map: MapDto::from_core(f),
            lift: LiftDto::from_core(g)?,
        })
    }

    pub fn to_core(&self) -> Result<(SimplicialMap, LiftFunction), CliError> {
        check_schema(&self.schema)?;
        if self.kind != Self::KIND {
            return Err(CliError::Schema(format!("expected kind {:?}, found {:?}", Self::KIND, self.kind)));
        }
        let f = self.map.to_core()?;
        let g = self.lift.to_core()?;
        if let Some(d) = g.input_dim() {
            if d != f.source.ambient_dim() {
                return Err(CliError::Schema(format!(
                    "lift takes {d} coordinates but the source lives in dimension {}",
                    f.source.ambient_dim()
                )));
            }
        }
        Ok((f, g))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparatorDto {
    pub weights: Vec<String>,
    pub offset: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceNumeric {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertEntryDto {
    pub u: usize,
    pub v: usize,
    pub separator: SeparatorDto,
    pub lower_squared: String,
    pub numeric: DistanceNumeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigNumeric {
    pub safety: f64,
    pub osc_resolution: usize,
    pub cert_resolution: usize,
    pub eta: f64,
    pub max_rounds: usize,
    pub max_retries: usize,
}

impl From<&LiftConfig> for ConfigNumeric {
    fn from(c: &LiftConfig) -> Self {
        ConfigNumeric {
            safety: c.safety,
            osc_resolution: c.osc_resolution,
            cert_resolution: c.cert_resolution,
            eta: c.eta,
            max_rounds: c.max_rounds,
            max_retries: c.max_retries,
        }
    }
}

impl From<&ConfigNumeric> for LiftConfig {
    fn from(c: &ConfigNumeric) -> Self {
        LiftConfig {
            safety: c.safety,
            osc_resolution: c.osc_resolution,
            cert_resolution: c.cert_resolution,
            eta: c.eta,
            max_rounds: c.max_rounds,
            max_retries: c.max_retries,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditNumeric {
    pub d: Vec<Option<f64>>,
    pub r: Vec<Option<f64>>,
    pub rounds: Vec<usize>,
    pub attempts: usize,
    pub safety: f64,
    pub eta_min: f64,
    pub k_vertices: usize,
    pub k_prime_simplices: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangulationNumeric {
    pub config: ConfigNumeric,
    pub audit: AuditNumeric,
}

/// A [`LiftTriangulation`] with its certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangulationDto {
    pub schema: String,
    pub kind: String,
    pub instance: InstanceDto,
    /// `f: K → L`; carriers point into the instance complexes.
    pub subdivided: MapDto,
    /// `K'`; vertex `i` is the weighted barycenter of simplex `i` of `K`.
    pub k_prime: ComplexDto,
    pub l_prime: ComplexDto,
    pub derived_vertex_map: Vec<usize>,
    pub certificate: Vec<CertEntryDto>,
    pub numeric: TriangulationNumeric,
}

impl TriangulationDto {
    pub const KIND: &'static str = "triangulation";

    pub fn new(instance: InstanceDto, t: &LiftTriangulation, cfg: &LiftConfig) -> Self {
        let a = &t.audit;
        TriangulationDto {
            schema: SCHEMA.into(),
            kind: Self::KIND.into(),
            instance,
            subdivided: MapDto::from_core(&t.map),
            k_prime: ComplexDto::from_core(&t.k_derived.result),
            l_prime: ComplexDto::from_core(&t.l_derived.result),
            derived_vertex_map: t.derived_map.vertex_map.clone(),
            certificate: t
                .certificate
                .iter()
                .map(|e| CertEntryDto {
                    u: e.u,
                    v: e.v,
                    separator: SeparatorDto { weights: rats(&e.separator.weights), offset: rat_str(&e.separator.offset) },
                    lower_squared: rat_str(&e.distance.lower_squared),
                    numeric: DistanceNumeric { lower: e.distance.lower, upper: e.distance.upper },
                })
                .collect(),
            numeric: TriangulationNumeric {
                config: cfg.into(),
                audit: AuditNumeric {
                    d: a.d.clone(),
                    r: a.r.clone(),
                    rounds: a.rounds.clone(),
                    attempts: a.attempts,
                    safety: a.safety,
                    eta_min: a.eta_min,
                    k_vertices: a.k_vertices,
                    k_prime_simplices: a.k_prime_simplices,
                },
            },
        }
    }

    pub fn to_core(&self) -> Result<(LiftTriangulation, LiftFunction), CliError> {
        check_schema(&self.schema)?;
        if self.kind != Self::KIND {
            return Err(CliError::Schema(format!("expected kind {:?}, found {:?}", Self::KIND, self.kind)));
        }
        let (base, g) = self.instance.to_core()?;
        let map = self.subdivided.to_core()?;
        let k_derived = DerivedSubdivision { parent: map.source.clone(), result: self.k_prime.to_core()? };
        let l_derived = DerivedSubdivision { parent: map.target.clone(), result: self.l_prime.to_core()? };
        for d in [&k_derived, &l_derived] {
            if d.result.num_vertices() != d.parent.len() {
                return Err(CliError::Schema("derived complex must have one vertex per parent simplex".into()));
            }
        }
        let derived_map =
            SimplicialMap::new(k_derived.result.clone(), l_derived.result.clone(), self.derived_vertex_map.clone())?;
        let certificate = self
            .certificate
            .iter()
            .map(|e| {
                Ok(CertificateEntry {
                    u: e.u,
                    v: e.v,
                    separator: AffineFunctional { weights: parse_rats(&e.separator.weights)?, offset: parse_rat(&e.separator.offset)? },
                    distance: HullDistance {
                        lower_squared: parse_rat(&e.lower_squared)?,
                        lower: e.numeric.lower,
                        upper: e.numeric.upper,
                    },
                })
            })
            .collect::<Result<_, CliError>>()?;
        let a = &self.numeric.audit;
        let audit = Audit {
            d: a.d.clone(),
            r: a.r.clone(),
            rounds: a.rounds.clone(),
            attempts: a.attempts,
            safety: a.safety,
            eta_min: a.eta_min,
            k_vertices: a.k_vertices,
            k_prime_simplices: a.k_prime_simplices,
        };
        Ok((LiftTriangulation { base, map, k_derived, l_derived, derived_map, certificate, audit }, g))
    }
}

/// Just enough of a document to dispatch on.
#[derive(Debug, Clone, Deserialize)]
pub struct Envelope {
    pub schema: Option<String>,
    pub kind: Option<String>,
}

impl Envelope {
    pub fn kind(&self) -> Result<&str, CliError> {
        check_schema(self.schema.as_deref().unwrap_or(""))?;
        self.kind.as_deref().ok_or_else(|| CliError::Schema("missing `kind`".into()))
    }
}

/// Bare complex or map documents accepted by `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    pub schema: String,
    pub kind: String,
    pub complex: ComplexDto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub schema: String,
    pub kind: String,
    pub map: MapDto,
}

/// Exact payload of a point of `Δ_{F_r}` in product coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayloadDto {
    pub t: Vec<String>,
    pub x1: String,
    pub x2: String,
    pub c: Vec<Vec<String>>,
    pub unused: Vec<String>,
}

impl PayloadDto {
    pub fn from_core(p: &plk_core::morin::ProductPayload) -> Self {
        PayloadDto {
            t: rats(&p.t),
            x1: rat_str(&p.x1),
            x2: rat_str(&p.x2),
            c: p.c.iter().map(|row| rats(row)).collect(),
            unused: rats(&p.unused),
        }
    }

    pub fn to_core(&self) -> Result<plk_core::morin::ProductPayload, CliError> {
        Ok(plk_core::morin::ProductPayload {
            t: parse_rats(&self.t)?,
            x1: parse_rat(&self.x1)?,
            x2: parse_rat(&self.x2)?,
            c: self.c.iter().map(|row| parse_rats(row)).collect::<Result<_, _>>()?,
            unused: parse_rats(&self.unused)?,
        })
    }
}

/// A pair of points with equal image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDto {
    pub first: Vec<String>,
    pub second: Vec<String>,
}

impl PairDto {
    pub fn new(a: &Point, b: &Point) -> Self {
        PairDto { first: rats(&a.coords), second: rats(&b.coords) }
    }

    pub fn points(&self) -> Result<(Point, Point), CliError> {
        Ok((Point::new(parse_rats(&self.first)?), Point::new(parse_rats(&self.second)?)))
    }
}

pub fn rational_list(s: &str) -> Result<Vec<Rational>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|p| parse_rational(p).map_err(|e| CliError::Usage(e.to_string()))).collect()
}

pub fn rational_strings(v: &[Rational]) -> Vec<String> {
    rats(v)
}
