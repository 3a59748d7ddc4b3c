//! Catalog of mappings on R^d with declared analytic properties, the convex
//! sets their fixed-point sets live on, and pointwise property checkers.
//!
//! The catalog is closed: half-space / ball / box projections, a radial
//! oscillator (quasinonexpansive but not nonexpansive), the identity, and the
//! convex combination `U = βT + (1−β)S`. Property flags are *declared* at
//! construction and kept consistent (firmly nonexpansive ⇒ nonexpansive ⇒
//! quasinonexpansive); they are not runtime-verified predicates, since the
//! sequence-quantified definitions are not falsifiable by finite sampling.
//! The pointwise checkers [`quasi_check`] and [`firm_check`] are the sampling
//! surrogates used by the test suites.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{combine, Vector};

/// Membership tolerance used when gating fixed-set witnesses.
pub const FIX_MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("inconsistent property flags: {0}")]
    InconsistentFlags(String),
    #[error("no witness of fixed-set intersection: {0}")]
    NoWitness(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Analytic properties a catalog operator may declare.
///
/// `DemiclosedComplementAtZero` refers to `I − T`; in R^d it holds for every
/// continuous map, which covers the whole catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Nonexpansive,
    Quasinonexpansive,
    StronglyQuasinonexpansive,
    FirmlyNonexpansive,
    DemiclosedComplementAtZero,
}

/// Closes a flag set upward along the implication chain
/// firmly ⇒ nonexpansive ⇒ quasinonexpansive and strongly ⇒ quasi.
fn close_upward(mut props: BTreeSet<Property>) -> BTreeSet<Property> {
    if props.contains(&Property::FirmlyNonexpansive) {
        props.insert(Property::Nonexpansive);
    }
    if props.contains(&Property::Nonexpansive) {
        props.insert(Property::Quasinonexpansive);
    }
    if props.contains(&Property::StronglyQuasinonexpansive) {
        props.insert(Property::Quasinonexpansive);
    }
    props
}

fn is_upward_closed(props: &BTreeSet<Property>) -> bool {
    *props == close_upward(props.clone())
}

// ---------------------------------------------------------------------------
// Convex sets
// ---------------------------------------------------------------------------

/// A closed convex subset of R^d with a membership test and, for the
/// primitive kinds, an analytic metric projection. Intersections have no
/// analytic projection; the oracle module computes those.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(try_from = "RawConvexSetSpec")]
pub enum ConvexSetSpec {
    /// `{ x : <a, x> <= b }` with `a != 0`.
    Halfspace { a: Vector, b: f64 },
    /// Closed ball of radius `r > 0` around `c`.
    Ball { c: Vector, r: f64 },
    /// Axis-aligned box `[lo, hi]`, `lo <= hi` componentwise.
    Box { lo: Vector, hi: Vector },
    /// Intersection of child sets (same dimension, nonempty list).
    Intersection { sets: Vec<ConvexSetSpec> },
}

/// Unvalidated mirror used for deserialization.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawConvexSetSpec {
    Halfspace { a: Vector, b: f64 },
    Ball { c: Vector, r: f64 },
    Box { lo: Vector, hi: Vector },
    Intersection { sets: Vec<ConvexSetSpec> },
}

impl TryFrom<RawConvexSetSpec> for ConvexSetSpec {
    type Error = OperatorError;
    fn try_from(raw: RawConvexSetSpec) -> Result<Self, Self::Error> {
        match raw {
            RawConvexSetSpec::Halfspace { a, b } => ConvexSetSpec::halfspace(a, b),
            RawConvexSetSpec::Ball { c, r } => ConvexSetSpec::ball(c, r),
            RawConvexSetSpec::Box { lo, hi } => ConvexSetSpec::axis_box(lo, hi),
            RawConvexSetSpec::Intersection { sets } => ConvexSetSpec::intersection(sets),
        }
    }
}

impl ConvexSetSpec {
    pub fn halfspace(a: Vector, b: f64) -> Result<Self, OperatorError> {
        if a.norm() == 0.0 {
            return Err(OperatorError::InvalidSet(
                "halfspace normal must be nonzero".into(),
            ));
        }
        if !b.is_finite() {
            return Err(OperatorError::InvalidSet("halfspace offset must be finite".into()));
        }
        Ok(ConvexSetSpec::Halfspace { a, b })
    }

    pub fn ball(c: Vector, r: f64) -> Result<Self, OperatorError> {
        if !(r.is_finite() && r > 0.0) {
            return Err(OperatorError::InvalidSet(format!(
                "ball radius must be positive, got {r}"
            )));
        }
        Ok(ConvexSetSpec::Ball { c, r })
    }

    pub fn axis_box(lo: Vector, hi: Vector) -> Result<Self, OperatorError> {
        if lo.dim() != hi.dim() {
            return Err(OperatorError::InvalidSet(format!(
                "box bounds have mismatched dimensions {} vs {}",
                lo.dim(),
                hi.dim()
            )));
        }
        for (i, (l, h)) in lo.as_slice().iter().zip(hi.as_slice()).enumerate() {
            if l > h {
                return Err(OperatorError::InvalidSet(format!(
                    "box bound lo > hi in component {i} ({l} > {h})"
                )));
            }
        }
        Ok(ConvexSetSpec::Box { lo, hi })
    }

    pub fn intersection(sets: Vec<ConvexSetSpec>) -> Result<Self, OperatorError> {
        if sets.is_empty() {
            return Err(OperatorError::InvalidSet(
                "intersection needs at least one child set".into(),
            ));
        }
        let d = sets[0].dim();
        if sets.iter().any(|s| s.dim() != d) {
            return Err(OperatorError::InvalidSet(
                "intersection children have mismatched dimensions".into(),
            ));
        }
        Ok(ConvexSetSpec::Intersection { sets })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSetSpec::Halfspace { a, .. } => a.dim(),
            ConvexSetSpec::Ball { c, .. } => c.dim(),
            ConvexSetSpec::Box { lo, .. } => lo.dim(),
            ConvexSetSpec::Intersection { sets } => sets[0].dim(),
        }
    }

    /// Distance-scale violation of membership: zero inside the set, the
    /// Euclidean distance to the set for primitive kinds, and the max of the
    /// children's violations for intersections.
    pub fn violation(&self, x: &Vector) -> f64 {
        match self {
            ConvexSetSpec::Halfspace { a, b } => (a.inner(x) - b).max(0.0) / a.norm(),
            ConvexSetSpec::Ball { c, r } => (x.dist(c) - r).max(0.0),
            ConvexSetSpec::Box { lo, hi } => {
                let proj = project_box(lo, hi, x);
                x.dist(&proj)
            }
            ConvexSetSpec::Intersection { sets } => sets
                .iter()
                .map(|s| s.violation(x))
                .fold(0.0, f64::max),
        }
    }

    pub fn membership(&self, x: &Vector, tol: f64) -> bool {
        self.violation(x) <= tol
    }

    /// Analytic metric projection; `None` for intersections.
    pub fn analytic_project(&self, x: &Vector) -> Option<Vector> {
        match self {
            ConvexSetSpec::Halfspace { a, b } => Some(project_halfspace(a, *b, x)),
            ConvexSetSpec::Ball { c, r } => Some(project_ball(c, *r, x)),
            ConvexSetSpec::Box { lo, hi } => Some(project_box(lo, hi, x)),
            ConvexSetSpec::Intersection { .. } => None,
        }
    }

    /// Flattens nested intersections into primitive leaves.
    pub fn leaves(&self) -> Vec<&ConvexSetSpec> {
        match self {
            ConvexSetSpec::Intersection { sets } => {
                sets.iter().flat_map(|s| s.leaves()).collect()
            }
            primitive => vec![primitive],
        }
    }
}

/// `x − max(0, <a,x> − b)/|a|² · a`; the result satisfies `<a, result> <= b`
/// up to rounding. Already-feasible points are returned unchanged.
pub fn project_halfspace(a: &Vector, b: f64, x: &Vector) -> Vector {
    let excess = a.inner(x) - b;
    if excess <= 0.0 {
        return x.clone();
    }
    x.sub(&a.scale(excess / a.inner(a)))
}

/// `x` when `|x−c| <= r`, otherwise the radial pullback `c + r(x−c)/|x−c|`.
pub fn project_ball(c: &Vector, r: f64, x: &Vector) -> Vector {
    let offset = x.sub(c);
    let dist = offset.norm();
    if dist <= r {
        return x.clone();
    }
    c.add(&offset.scale(r / dist))
}

/// Componentwise clamp of `x` to `[lo, hi]`.
pub fn project_box(lo: &Vector, hi: &Vector, x: &Vector) -> Vector {
    let coords = x
        .as_slice()
        .iter()
        .zip(lo.as_slice())
        .zip(hi.as_slice())
        .map(|((&v, &l), &h)| v.clamp(l, h))
        .collect();
    Vector::new(coords).expect("clamp of finite input is finite")
}

/// `0` at the origin, else `(x/2)·cos(1/|x|)`.
///
/// Since `|Tx| <= |x|/2`, the only fixed point is `0` and the map is
/// quasinonexpansive and strongly quasinonexpansive with respect to it, while
/// the oscillation of `cos(1/|x|)` near the origin breaks nonexpansiveness
/// (adjacent small inputs can map to opposite signs).
pub fn radial_oscillator(x: &Vector) -> Vector {
    let r = x.norm();
    if r == 0.0 {
        return x.clone();
    }
    x.scale(0.5 * (1.0 / r).cos())
}

// ---------------------------------------------------------------------------
// Fixed-set descriptions
// ---------------------------------------------------------------------------

/// Description of an operator's fixed-point set, rich enough for membership
/// gating of witnesses and for computing reference projections.
#[derive(Debug, Clone, PartialEq)]
pub enum FixDescription {
    /// The fixed set is a catalog convex set.
    Set(ConvexSetSpec),
    /// The singleton `{0}`.
    Origin,
    /// All of R^d (identity mapping).
    Everything,
    /// Intersection of the children's fixed sets.
    Intersection(Vec<FixDescription>),
}

impl FixDescription {
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        match self {
            FixDescription::Set(set) => set.membership(x, tol),
            FixDescription::Origin => x.norm() <= tol,
            FixDescription::Everything => true,
            FixDescription::Intersection(children) => {
                children.iter().all(|c| c.contains(x, tol))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// Kind tag plus kind-specific parameters. Serialized adjacently as
/// `{"kind": ..., "params": {...}}` (unit kinds omit `params`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum OperatorKind {
    HalfspaceProjection {
        a: Vector,
        b: f64,
    },
    BallProjection {
        c: Vector,
        r: f64,
    },
    BoxProjection {
        lo: Vector,
        hi: Vector,
    },
    RadialOscillator,
    ConvexCombination {
        beta: f64,
        t: Box<OperatorSpec>,
        s: Box<OperatorSpec>,
        /// Point certifying `Fix(T) ∩ Fix(S) != ∅`, required at construction.
        witness: Vector,
    },
    Identity,
}

/// A mapping descriptor: kind, parameters, and declared analytic properties.
///
/// Immutable after construction; `apply` and the checkers are pure, so specs
/// can be shared freely across concurrent runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOperatorSpec")]
pub struct OperatorSpec {
    #[serde(flatten)]
    kind: OperatorKind,
    properties: BTreeSet<Property>,
}

#[derive(Deserialize)]
struct RawOperatorSpec {
    #[serde(flatten)]
    kind: OperatorKind,
    #[serde(default)]
    properties: Option<BTreeSet<Property>>,
}

impl TryFrom<RawOperatorSpec> for OperatorSpec {
    type Error = OperatorError;
    fn try_from(raw: RawOperatorSpec) -> Result<Self, Self::Error> {
        let spec = OperatorSpec::from_kind(raw.kind)?;
        match raw.properties {
            None => Ok(spec),
            Some(props) => spec.with_declared_properties(props),
        }
    }
}

impl OperatorSpec {
    /// Validates parameters and assigns the canonical property flags for the
    /// kind.
    fn from_kind(kind: OperatorKind) -> Result<Self, OperatorError> {
        match &kind {
            OperatorKind::HalfspaceProjection { a, b } => {
                ConvexSetSpec::halfspace(a.clone(), *b)?;
            }
            OperatorKind::BallProjection { c, r } => {
                ConvexSetSpec::ball(c.clone(), *r)?;
            }
            OperatorKind::BoxProjection { lo, hi } => {
                ConvexSetSpec::axis_box(lo.clone(), hi.clone())?;
            }
            OperatorKind::RadialOscillator | OperatorKind::Identity => {}
            OperatorKind::ConvexCombination { beta, t, s, witness } => {
                validate_combination(*beta, t, s, witness)?;
            }
        }
        let properties = canonical_properties(&kind);
        Ok(OperatorSpec { kind, properties })
    }

    /// Replaces the declared flags with a (weaker) subset. The subset must be
    /// upward-closed and may not claim properties the catalog does not know
    /// to hold for this kind.
    pub fn with_declared_properties(
        self,
        props: BTreeSet<Property>,
    ) -> Result<Self, OperatorError> {
        if !is_upward_closed(&props) {
            return Err(OperatorError::InconsistentFlags(
                "flag set is not closed under firmly ⇒ nonexpansive ⇒ quasinonexpansive".into(),
            ));
        }
        let canonical = canonical_properties(&self.kind);
        if let Some(extra) = props.difference(&canonical).next() {
            return Err(OperatorError::InconsistentFlags(format!(
                "property {extra:?} is not known to hold for this operator kind"
            )));
        }
        Ok(OperatorSpec { properties: props, ..self })
    }

    pub fn halfspace_projection(a: Vector, b: f64) -> Result<Self, OperatorError> {
        Self::from_kind(OperatorKind::HalfspaceProjection { a, b })
    }

    pub fn ball_projection(c: Vector, r: f64) -> Result<Self, OperatorError> {
        Self::from_kind(OperatorKind::BallProjection { c, r })
    }

    pub fn box_projection(lo: Vector, hi: Vector) -> Result<Self, OperatorError> {
        Self::from_kind(OperatorKind::BoxProjection { lo, hi })
    }

    pub fn radial_oscillator() -> Self {
        Self::from_kind(OperatorKind::RadialOscillator).expect("no parameters to validate")
    }

    pub fn identity() -> Self {
        Self::from_kind(OperatorKind::Identity).expect("no parameters to validate")
    }

    /// The combination `U = βT + (1−β)S`.
    ///
    /// Requires `β ∈ [0,1]`, both children quasinonexpansive, and a witness
    /// point in both fixed sets; construction is refused otherwise. For
    /// `β ∈ (0,1)` the fixed set of `U` is exactly `Fix(T) ∩ Fix(S)`; at the
    /// endpoints it is the surviving child's set.
    pub fn convex_combination(
        beta: f64,
        t: OperatorSpec,
        s: OperatorSpec,
        witness: Vector,
    ) -> Result<Self, OperatorError> {
        Self::from_kind(OperatorKind::ConvexCombination {
            beta,
            t: Box::new(t),
            s: Box::new(s),
            witness,
        })
    }

    /// Combination used internally by the iteration loop, where the nonempty
    /// intersection is the run's standing hypothesis rather than a checked
    /// input. Parameters are still validated.
    pub(crate) fn convex_combination_unchecked(
        beta: f64,
        t: OperatorSpec,
        s: OperatorSpec,
    ) -> OperatorSpec {
        assert!((0.0..=1.0).contains(&beta), "combination weight outside [0,1]");
        let kind = OperatorKind::ConvexCombination {
            beta,
            t: Box::new(t),
            s: Box::new(s),
            witness: Vector::zeros(1),
        };
        let properties = canonical_properties(&kind);
        OperatorSpec { kind, properties }
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn declared_properties(&self) -> &BTreeSet<Property> {
        &self.properties
    }

    pub fn has_property(&self, p: Property) -> bool {
        self.properties.contains(&p)
    }

    /// Dimension pinned by the parameters; `None` for dimension-agnostic
    /// kinds (identity, radial oscillator).
    pub fn dimension(&self) -> Option<usize> {
        match &self.kind {
            OperatorKind::HalfspaceProjection { a, .. } => Some(a.dim()),
            OperatorKind::BallProjection { c, .. } => Some(c.dim()),
            OperatorKind::BoxProjection { lo, .. } => Some(lo.dim()),
            OperatorKind::RadialOscillator | OperatorKind::Identity => None,
            OperatorKind::ConvexCombination { t, s, .. } => {
                t.dimension().or_else(|| s.dimension())
            }
        }
    }

    /// Description of the operator's fixed-point set.
    pub fn fix_description(&self) -> FixDescription {
        match &self.kind {
            OperatorKind::HalfspaceProjection { a, b } => FixDescription::Set(
                ConvexSetSpec::halfspace(a.clone(), *b).expect("validated at construction"),
            ),
            OperatorKind::BallProjection { c, r } => FixDescription::Set(
                ConvexSetSpec::ball(c.clone(), *r).expect("validated at construction"),
            ),
            OperatorKind::BoxProjection { lo, hi } => FixDescription::Set(
                ConvexSetSpec::axis_box(lo.clone(), hi.clone())
                    .expect("validated at construction"),
            ),
            OperatorKind::RadialOscillator => FixDescription::Origin,
            OperatorKind::Identity => FixDescription::Everything,
            OperatorKind::ConvexCombination { beta, t, s, .. } => {
                if *beta == 1.0 {
                    t.fix_description()
                } else if *beta == 0.0 {
                    s.fix_description()
                } else {
                    FixDescription::Intersection(vec![t.fix_description(), s.fix_description()])
                }
            }
        }
    }

    /// Evaluates the mapping. Total on R^d; panics on dimension mismatch.
    pub fn apply(&self, x: &Vector) -> Vector {
        if let Some(d) = self.dimension() {
            assert_eq!(d, x.dim(), "dimension mismatch: {} vs {}", d, x.dim());
        }
        match &self.kind {
            OperatorKind::HalfspaceProjection { a, b } => project_halfspace(a, *b, x),
            OperatorKind::BallProjection { c, r } => project_ball(c, *r, x),
            OperatorKind::BoxProjection { lo, hi } => project_box(lo, hi, x),
            OperatorKind::RadialOscillator => radial_oscillator(x),
            OperatorKind::Identity => x.clone(),
            OperatorKind::ConvexCombination { beta, t, s, .. } => {
                combine(*beta, &t.apply(x), &s.apply(x))
            }
        }
    }

    fn is_catalog_projection(&self) -> bool {
        matches!(
            self.kind,
            OperatorKind::HalfspaceProjection { .. }
                | OperatorKind::BallProjection { .. }
                | OperatorKind::BoxProjection { .. }
        )
    }
}

fn validate_combination(
    beta: f64,
    t: &OperatorSpec,
    s: &OperatorSpec,
    witness: &Vector,
) -> Result<(), OperatorError> {
    if !(beta.is_finite() && (0.0..=1.0).contains(&beta)) {
        return Err(OperatorError::Contract(format!(
            "combination weight must lie in [0,1], got {beta}"
        )));
    }
    for (label, child) in [("t", t), ("s", s)] {
        if !child.has_property(Property::Quasinonexpansive) {
            return Err(OperatorError::Contract(format!(
                "combination child '{label}' is not declared quasinonexpansive"
            )));
        }
    }
    if let (Some(dt), Some(ds)) = (t.dimension(), s.dimension()) {
        if dt != ds {
            return Err(OperatorError::Contract(format!(
                "combination children have mismatched dimensions {dt} vs {ds}"
            )));
        }
    }
    if let Some(d) = t.dimension().or_else(|| s.dimension()) {
        if witness.dim() != d {
            return Err(OperatorError::NoWitness(format!(
                "witness has dimension {} but children act on R^{d}",
                witness.dim()
            )));
        }
    }
    let in_t = t.fix_description().contains(witness, FIX_MEMBERSHIP_TOL);
    let in_s = s.fix_description().contains(witness, FIX_MEMBERSHIP_TOL);
    if !(in_t && in_s) {
        return Err(OperatorError::NoWitness(format!(
            "witness is not in both fixed sets (in Fix(t): {in_t}, in Fix(s): {in_s})"
        )));
    }
    Ok(())
}

/// Property flags the catalog knows to hold for a kind. Every catalog map is
/// continuous, so `I − T` demiclosed at 0 holds throughout in R^d.
fn canonical_properties(kind: &OperatorKind) -> BTreeSet<Property> {
    use Property::*;
    let base: &[Property] = match kind {
        // Metric projections are firmly nonexpansive, hence all of the chain,
        // and strongly quasinonexpansive.
        OperatorKind::HalfspaceProjection { .. }
        | OperatorKind::BallProjection { .. }
        | OperatorKind::BoxProjection { .. }
        | OperatorKind::Identity => &[
            FirmlyNonexpansive,
            Nonexpansive,
            Quasinonexpansive,
            StronglyQuasinonexpansive,
            DemiclosedComplementAtZero,
        ],
        OperatorKind::RadialOscillator => &[
            Quasinonexpansive,
            StronglyQuasinonexpansive,
            DemiclosedComplementAtZero,
        ],
        OperatorKind::ConvexCombination { beta, t, s, .. } => {
            let mut props = BTreeSet::from([Quasinonexpansive, DemiclosedComplementAtZero]);
            if t.has_property(Nonexpansive) && s.has_property(Nonexpansive) {
                props.insert(Nonexpansive);
            }
            if t.has_property(FirmlyNonexpansive) && s.has_property(FirmlyNonexpansive) {
                props.insert(FirmlyNonexpansive);
            }
            let strongly = if *beta == 1.0 {
                t.has_property(StronglyQuasinonexpansive)
            } else if *beta == 0.0 {
                s.has_property(StronglyQuasinonexpansive)
            } else {
                t.has_property(StronglyQuasinonexpansive)
                    || s.has_property(StronglyQuasinonexpansive)
            };
            if strongly {
                props.insert(StronglyQuasinonexpansive);
            }
            return close_upward(props);
        }
    };
    base.iter().copied().collect()
}

/// Displacement `|x − op(x)|`: the numeric surrogate for fixed-point
/// membership.
pub fn fixed_point_residual(op: &OperatorSpec, x: &Vector) -> f64 {
    x.dist(&op.apply(x))
}

/// Pointwise quasinonexpansiveness check `|op(x) − p| <= |x − p|` (+1e-9).
///
/// `p` must be accepted by the operator's fixed-set description; the
/// inequality is not claimed elsewhere.
pub fn quasi_check(op: &OperatorSpec, x: &Vector, p: &Vector) -> Result<bool, OperatorError> {
    if !op.fix_description().contains(p, FIX_MEMBERSHIP_TOL) {
        return Err(OperatorError::Precondition(
            "point p is not in the operator's declared fixed set".into(),
        ));
    }
    Ok(op.apply(x).dist(p) <= x.dist(p) + 1e-9)
}

/// Pointwise firm-nonexpansiveness check
/// `|Px − Py|² <= <Px − Py, x − y>` (+1e-9) for catalog projections.
pub fn firm_check(op: &OperatorSpec, x: &Vector, y: &Vector) -> Result<bool, OperatorError> {
    if !op.is_catalog_projection() {
        return Err(OperatorError::Precondition(
            "firm_check applies to catalog projections only".into(),
        ));
    }
    let px = op.apply(x);
    let py = op.apply(y);
    let diff = px.sub(&py);
    Ok(diff.inner(&diff) <= diff.inner(&x.sub(y)) + 1e-9)
}
