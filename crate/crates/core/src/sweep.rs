//! Parameter sweeps: grid evaluation, critical-point detection, CSV and
//! report output, and an on-disk result cache.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{Bipartition, ComplexMatrix};
use crate::measures::{state_distance, DistanceKind, MeasureKind};
use crate::model::{self, Boundary, CurveSpec, Temperature};
use crate::probe::{self, Classification, CurveState, DivergenceReport, StateFamily, XyFamily};
use crate::states::{IncoherentBasis, PureState, QuantumState};

/// Bisection stops once the bracket is narrower than this.
pub const LOCALIZE_WIDTH: f64 = 1e-6;
/// A grid interval is a jump candidate when its change exceeds both
/// neighbours by this factor.
const JUMP_FACTOR: f64 = 4.0;
const JUMP_FLOOR: f64 = 1e-6;
const BOUND_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
}

impl Grid {
    pub fn spacing(&self) -> f64 {
        (self.lambda_max - self.lambda_min) / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.lambda_max } else { self.lambda_min + i as f64 * h })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MeasureName {
    CoherenceL1,
    CoherenceRelativeEntropy,
    GeometricCoherence,
    GeometricEntanglement,
    GeometricDiscord,
    LineElement,
    BerryPhase,
    OrderParameter,
}

impl MeasureName {
    pub const ALL: [MeasureName; 8] = [
        MeasureName::CoherenceL1,
        MeasureName::CoherenceRelativeEntropy,
        MeasureName::GeometricCoherence,
        MeasureName::GeometricEntanglement,
        MeasureName::GeometricDiscord,
        MeasureName::LineElement,
        MeasureName::BerryPhase,
        MeasureName::OrderParameter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureName::CoherenceL1 => "coherence_l1",
            MeasureName::CoherenceRelativeEntropy => "coherence_relative_entropy",
            MeasureName::GeometricCoherence => "geometric_coherence",
            MeasureName::GeometricEntanglement => "geometric_entanglement",
            MeasureName::GeometricDiscord => "geometric_discord",
            MeasureName::LineElement => "line_element",
            MeasureName::BerryPhase => "berry_phase",
            MeasureName::OrderParameter => "order_parameter",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    fn uses_basis(self) -> bool {
        matches!(
            self,
            MeasureName::CoherenceL1 | MeasureName::CoherenceRelativeEntropy | MeasureName::GeometricCoherence
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BasisSpec {
    Computational,
    BellType2q,
    /// Rebuilt at each detected critical point from the states on either side.
    Theorem3Auto,
    /// Parity-sector Fourier basis, rebuilt at each detected critical point.
    ParityFourierAuto,
    Explicit { label: String, basis: IncoherentBasis },
}

impl BasisSpec {
    pub fn label(&self) -> &str {
        match self {
            BasisSpec::Computational => "computational",
            BasisSpec::BellType2q => "bell_type_2q",
            BasisSpec::Theorem3Auto => "theorem3_auto",
            BasisSpec::ParityFourierAuto => "parity_fourier_auto",
            BasisSpec::Explicit { label, .. } => label,
        }
    }

    pub fn is_auto(&self) -> bool {
        matches!(self, BasisSpec::Theorem3Auto | BasisSpec::ParityFourierAuto)
    }

    fn resolve(&self, dim: usize) -> Option<IncoherentBasis> {
        match self {
            BasisSpec::Computational => Some(IncoherentBasis::computational(dim)),
            BasisSpec::BellType2q => Some(IncoherentBasis::bell_type_2q()),
            BasisSpec::Explicit { basis, .. } => Some(basis.clone()),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    pub csv: String,
    pub report: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { csv: "results.csv".into(), report: "report.json".into() }
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub n_sites: usize,
    pub boundary: Boundary,
    pub split: Bipartition,
    pub curve: CurveSpec,
    pub grid: Grid,
    /// Finite-difference steps, strictly decreasing.
    pub steps: Vec<f64>,
    pub measures: Vec<MeasureName>,
    pub bases: Vec<BasisSpec>,
    pub distances: Vec<DistanceKind>,
    pub output: OutputSpec,
}

pub const DEFAULT_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

impl SweepConfig {
    /// A config with default steps, periodic boundary, computational basis
    /// and trace distance.
    pub fn new(n_sites: usize, curve: CurveSpec, points: usize, measures: Vec<MeasureName>) -> Result<Self> {
        let split = Bipartition::contiguous(n_sites, (n_sites / 2).max(1))?;
        let grid = Grid { lambda_min: curve.lambda_min, lambda_max: curve.lambda_max, points };
        let config = SweepConfig {
            n_sites,
            boundary: Boundary::Periodic,
            split,
            curve,
            grid,
            steps: DEFAULT_STEPS.to_vec(),
            measures,
            bases: vec![BasisSpec::Computational],
            distances: vec![DistanceKind::Trace],
            output: OutputSpec::default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(2..=model::MAX_SITES).contains(&self.n_sites) {
            return bad(format!("model.n must be between 2 and {}", model::MAX_SITES));
        }
        if self.split.n_sites() != self.n_sites {
            return bad("model.split does not match model.n".into());
        }
        let g = &self.grid;
        if g.points < 3 {
            return bad("grid.points must be at least 3".into());
        }
        if !(g.lambda_min.is_finite() && g.lambda_max.is_finite() && g.lambda_min < g.lambda_max) {
            return bad("grid.lambda_min must be below grid.lambda_max".into());
        }
        if self.curve.lambda_min != g.lambda_min || self.curve.lambda_max != g.lambda_max {
            return bad("curve range differs from grid range".into());
        }
        if self.steps.is_empty() {
            return bad("grid.steps is empty".into());
        }
        if self.steps.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return bad("grid.steps must be positive".into());
        }
        if self.steps.windows(2).any(|w| w[1] >= w[0]) {
            return bad("grid.steps must be strictly decreasing".into());
        }
        if self.steps[0] > g.spacing() * (1.0 + 1e-12) {
            return bad(format!("grid.steps: {} exceeds the grid spacing {}", self.steps[0], g.spacing()));
        }
        if self.measures.is_empty() {
            return bad("measures.list is empty".into());
        }
        let needs_basis = self.measures.iter().any(|m| m.uses_basis());
        if needs_basis && self.bases.is_empty() {
            return bad("bases.list is empty".into());
        }
        let needs_distance =
            self.measures.iter().any(|m| matches!(m, MeasureName::GeometricCoherence | MeasureName::LineElement));
        if needs_distance && self.distances.is_empty() {
            return bad("measures.distances is empty".into());
        }
        if self.n_sites != 2 {
            if self.measures.contains(&MeasureName::GeometricDiscord) {
                return bad("geometric_discord needs model.n = 2".into());
            }
            if self.bases.contains(&BasisSpec::BellType2q) {
                return bad("bell_type_2q needs model.n = 2".into());
            }
        }
        for b in &self.bases {
            if let BasisSpec::Explicit { label, basis } = b {
                if basis.dim() != self.dim() {
                    return bad(format!("bases.explicit.{label} has dimension {}, expected {}", basis.dim(), self.dim()));
                }
            }
        }
        let mut labels: Vec<&str> = self.bases.iter().map(|b| b.label()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return bad("bases.list names a basis twice".into());
        }
        Ok(())
    }

    /// Everything about the model and curve that a row value depends on.
    pub fn fingerprint(&self) -> String {
        let beta = self.curve.beta.as_ref().map_or_else(|| model::ZERO_TEMPERATURE.to_string(), |b| b.to_string());
        format!(
            "n={};boundary={};split={};delta={};h={};beta={}",
            self.n_sites,
            self.boundary.name(),
            self.split.label(),
            self.curve.delta,
            self.curve.h,
            beta
        )
    }

    pub fn family(&self) -> XyFamily {
        XyFamily::new(self.n_sites, self.boundary, self.curve.clone())
    }

    /// Channels that do not depend on detected critical points.
    pub fn static_channels(&self) -> Vec<Channel> {
        let mut out = Vec::new();
        let static_bases: Vec<(String, IncoherentBasis)> = self
            .bases
            .iter()
            .filter_map(|b| b.resolve(self.dim()).map(|basis| (b.label().to_string(), basis)))
            .collect();
        for &m in &self.measures {
            match m {
                MeasureName::LineElement => {
                    for &kind in &self.distances {
                        out.push(Channel { name: format!("line_element_{kind}"), kind: ChannelKind::LineElement(kind) });
                    }
                }
                MeasureName::BerryPhase => {
                    out.push(Channel { name: "berry_phase".into(), kind: ChannelKind::Berry });
                }
                MeasureName::OrderParameter => {
                    out.push(Channel { name: "order_parameter".into(), kind: ChannelKind::Order });
                }
                MeasureName::GeometricEntanglement => out.push(Channel {
                    name: format!("geometric_entanglement[{}]", self.split.label()),
                    kind: ChannelKind::Measure(MeasureKind::GeometricEntanglement { split: self.split.clone() }),
                }),
                MeasureName::GeometricDiscord => out.push(Channel {
                    name: "geometric_discord".into(),
                    kind: ChannelKind::Measure(MeasureKind::GeometricDiscord2q),
                }),
                _ => {
                    for (label, basis) in &static_bases {
                        out.extend(self.basis_channels(m, label, basis));
                    }
                }
            }
        }
        out
    }

    fn basis_channels(&self, m: MeasureName, label: &str, basis: &IncoherentBasis) -> Vec<Channel> {
        let basis = basis.clone();
        match m {
            MeasureName::CoherenceL1 => vec![Channel {
                name: format!("coherence_l1[{label}]"),
                kind: ChannelKind::Measure(MeasureKind::CoherenceL1 { basis }),
            }],
            MeasureName::CoherenceRelativeEntropy => vec![Channel {
                name: format!("coherence_relative_entropy[{label}]"),
                kind: ChannelKind::Measure(MeasureKind::CoherenceRelativeEntropy { basis }),
            }],
            MeasureName::GeometricCoherence => self
                .distances
                .iter()
                .map(|&kind| Channel {
                    name: format!("geometric_coherence_{kind}[{label}]"),
                    kind: ChannelKind::Measure(MeasureKind::GeometricCoherence { basis: basis.clone(), kind }),
                })
                .collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ChannelKind {
    Measure(MeasureKind),
    /// `ds/dλ` as a one-sided rate; its second difference goes in `d2`.
    LineElement(DistanceKind),
    /// `2π<ψ|S_z/2|ψ>` with `S_z` the total magnetization.
    Berry,
    /// `<Σ σz>`
    Order,
}

/// One named output column of a sweep.
#[derive(Clone, Debug)]
pub struct Channel {
    pub name: String,
    pub kind: ChannelKind,
}

impl Channel {
    fn fingerprint(&self) -> String {
        let mut s = self.name.clone();
        if let ChannelKind::Measure(m) = &self.kind {
            if let Some(basis) = m.basis() {
                let mut h = Sha256::new();
                for z in basis.matrix().entries() {
                    h.update(z.re.to_bits().to_le_bytes());
                    h.update(z.im.to_bits().to_le_bytes());
                }
                s.push('#');
                s.push_str(&hex::encode(h.finalize()));
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Crossing,
    Edge,
    Error,
    Overflow,
}

impl Flag {
    pub fn name(self) -> &'static str {
        match self {
            Flag::Crossing => "crossing",
            Flag::Edge => "edge",
            Flag::Error => "error",
            Flag::Overflow => "overflow",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Flag::Crossing, Flag::Edge, Flag::Error, Flag::Overflow].into_iter().find(|f| f.name() == s)
    }
}

/// One grid point of one channel. Missing numbers are reported through flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub lambda: f64,
    pub delta: Option<f64>,
    pub h: Option<f64>,
    /// `None` at zero temperature.
    pub beta: Option<f64>,
    pub measure: String,
    pub value: Option<f64>,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub flags: Vec<Flag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ResultRow {
    pub fn has(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }
}

/// Detected transition and its evidence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalPointRecord {
    pub lambda_c: f64,
    pub classification: String,
    pub detecting_measures: Vec<String>,
    pub berry_jump: Option<f64>,
    pub order_jump: Option<f64>,
    pub parity_flip: bool,
    /// Names of the bases rebuilt at this point.
    pub bases: Vec<String>,
    pub evidence: Vec<Evidence>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evidence {
    pub signal: String,
    pub classification: String,
    pub first_ratios: Vec<f64>,
    pub second_ratios: Vec<f64>,
    pub first_differences: Vec<f64>,
}

impl Evidence {
    fn from_report(signal: &str, r: &DivergenceReport) -> Self {
        Evidence {
            signal: signal.to_string(),
            classification: r.classification.name().to_string(),
            first_ratios: r.first_ratios.clone(),
            second_ratios: r.second_ratios.clone(),
            first_differences: r.levels.iter().map(|l| l.first).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    pub corrupt: usize,
}

/// Reverse-triangle checks made on consecutive grid states.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BoundStats {
    pub checked: usize,
    pub violations: usize,
    /// Largest `lhs - rhs` seen.
    pub worst_excess: f64,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub rows: Vec<ResultRow>,
    pub criticals: Vec<CriticalPointRecord>,
    pub cache: CacheStats,
    pub bounds: BoundStats,
}

/// Evaluation settings that do not change results.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; 0 means one per core.
    pub parallelism: usize,
    pub cache: Option<ResultCache>,
}

/// Memoizes states by the bit pattern of λ.
pub struct MemoFamily<F> {
    inner: F,
    memo: Mutex<HashMap<u64, Arc<CurveState>>>,
}

impl<F: StateFamily> MemoFamily<F> {
    pub fn new(inner: F) -> Self {
        MemoFamily { inner, memo: Mutex::new(HashMap::new()) }
    }

    pub fn get(&self, lambda: f64) -> Result<Arc<CurveState>> {
        if let Some(s) = self.memo.lock().expect("memo lock").get(&lambda.to_bits()) {
            return Ok(s.clone());
        }
        let s = Arc::new(self.inner.state_at(lambda)?);
        self.memo.lock().expect("memo lock").insert(lambda.to_bits(), s.clone());
        Ok(s)
    }
}

impl<F: StateFamily> StateFamily for MemoFamily<F> {
    fn state_at(&self, lambda: f64) -> Result<CurveState> {
        self.get(lambda).map(|s| (*s).clone())
    }
}

struct Sweeper<'a> {
    config: &'a SweepConfig,
    family: MemoFamily<XyFamily>,
    magnetization: ComplexMatrix,
    half_magnetization: ComplexMatrix,
    parity: Vec<f64>,
    cache: Option<&'a ResultCache>,
    hits: AtomicUsize,
    misses: AtomicUsize,
    corrupt: AtomicUsize,
    fingerprint: String,
}

impl<'a> Sweeper<'a> {
    fn new(config: &'a SweepConfig, cache: Option<&'a ResultCache>) -> Self {
        let magnetization = model::total_magnetization(config.n_sites);
        Sweeper {
            config,
            family: MemoFamily::new(config.family()),
            half_magnetization: magnetization.scale_real(0.5),
            magnetization,
            parity: model::parity_diagonal(config.n_sites),
            cache,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
            corrupt: AtomicUsize::new(0),
            fingerprint: config.fingerprint(),
        }
    }

    fn finest(&self) -> f64 {
        *self.config.steps.last().expect("validated steps")
    }

    fn in_range(&self, lambda: f64) -> bool {
        self.config.curve.contains(lambda)
    }

    fn channel_value(&self, kind: &ChannelKind, s: &CurveState) -> Result<f64> {
        match kind {
            ChannelKind::Measure(m) => m.evaluate(&s.state),
            ChannelKind::Berry => {
                let psi = s
                    .state
                    .as_pure()
                    .ok_or_else(|| Error::Unsupported("berry phase of a thermal state".into()))?;
                Ok(probe::berry_phase(psi, &self.half_magnetization, "Sz/2")?.analytic)
            }
            ChannelKind::Order => Ok(s.state.expectation(&self.magnetization).re),
            ChannelKind::LineElement(_) => Err(Error::Unsupported("line element is a pair quantity".into())),
        }
    }

    fn profile(&self, kind: &ChannelKind, lambda: f64) -> Result<(f64, bool)> {
        let s = self.family.get(lambda)?;
        Ok((self.channel_value(kind, &s)?, s.crossing))
    }

    fn row(&self, lambda: f64, channel: &Channel) -> ResultRow {
        let step = self.finest();
        let key = self.cache.map(|_| cache_key_from(&self.fingerprint, lambda, step, channel));
        if let (Some(cache), Some(key)) = (self.cache, &key) {
            match cache.lookup(key) {
                Lookup::Hit(row) => {
                    self.hits.fetch_add(1, Ordering::Relaxed);
                    return row;
                }
                Lookup::Corrupt => {
                    self.corrupt.fetch_add(1, Ordering::Relaxed);
                }
                Lookup::Miss => {}
            }
            self.misses.fetch_add(1, Ordering::Relaxed);
        }
        let row = self.compute_row(lambda, step, channel);
        if let (Some(cache), Some(key)) = (self.cache, &key) {
            // a failed write only costs a recomputation next time
            let _ = cache.put(key, &row);
        }
        row
    }

    fn compute_row(&self, lambda: f64, step: f64, channel: &Channel) -> ResultRow {
        let mut row = ResultRow {
            lambda,
            delta: None,
            h: None,
            beta: None,
            measure: channel.name.clone(),
            value: None,
            d1: None,
            d2: None,
            flags: Vec::new(),
            note: None,
        };
        let mut flags = Vec::new();
        let mut note = None;
        let mut fail = |e: Error, flags: &mut Vec<Flag>| {
            flags.push(Flag::Error);
            note.get_or_insert_with(|| e.to_string());
        };
        let centre = match self.family.get(lambda) {
            Ok(s) => s,
            Err(e) => {
                fail(e, &mut flags);
                row.flags = flags;
                row.note = note;
                return row;
            }
        };
        row.delta = Some(centre.point.delta);
        row.h = Some(centre.point.h);
        row.beta = match centre.point.temperature {
            Temperature::Zero => None,
            Temperature::Beta(b) => Some(b),
        };
        if centre.crossing {
            flags.push(Flag::Crossing);
        }
        let (lo, hi) = (lambda - step, lambda + step);
        let neighbours = if self.in_range(lo) && self.in_range(hi) {
            match (self.family.get(lo), self.family.get(hi)) {
                (Ok(a), Ok(b)) => Some((a, b)),
                (Err(e), _) | (_, Err(e)) => {
                    fail(e, &mut flags);
                    None
                }
            }
        } else {
            flags.push(Flag::Edge);
            None
        };
        if let Some((a, b)) = &neighbours {
            if a.crossing || b.crossing {
                flags.push(Flag::Crossing);
            }
        }

        match &channel.kind {
            ChannelKind::LineElement(kind) => {
                if self.in_range(hi) {
                    match self.family.get(hi).and_then(|b| state_distance(&b.state, &centre.state, *kind)) {
                        Ok(d) => row.value = Some(d / step),
                        Err(e) => fail(e, &mut flags),
                    }
                }
                if let Some((a, b)) = &neighbours {
                    let pair = state_distance(&b.state, &centre.state, *kind)
                        .and_then(|f| Ok((f, state_distance(&centre.state, &a.state, *kind)?)));
                    match pair {
                        Ok((f, back)) => row.d2 = Some((f - back) / (step * step)),
                        Err(e) => fail(e, &mut flags),
                    }
                }
            }
            kind => {
                match self.channel_value(kind, &centre) {
                    Ok(v) => row.value = Some(v),
                    Err(e) => fail(e, &mut flags),
                }
                if let (Some((a, b)), Some(mid)) = (&neighbours, row.value) {
                    match (self.channel_value(kind, a), self.channel_value(kind, b)) {
                        (Ok(lo_v), Ok(hi_v)) => {
                            row.d1 = Some((hi_v - lo_v) / (2.0 * step));
                            if !centre.crossing {
                                row.d2 = Some((hi_v - 2.0 * mid + lo_v) / (step * step));
                            }
                        }
                        (Err(e), _) | (_, Err(e)) => fail(e, &mut flags),
                    }
                }
            }
        }
        for slot in [&mut row.value, &mut row.d1, &mut row.d2] {
            if let Some(v) = *slot {
                if !v.is_finite() {
                    *slot = None;
                    flags.push(Flag::Overflow);
                }
            }
        }
        flags.sort_unstable();
        flags.dedup();
        row.flags = flags;
        row.note = note;
        row
    }

    fn parity_of(&self, s: &CurveState) -> Option<f64> {
        let psi = s.state.as_pure()?;
        Some(psi.amplitudes().iter().zip(&self.parity).map(|(z, p)| z.norm_sqr() * p).sum())
    }

    /// Narrows `[lo, hi]` onto the sub-interval carrying the larger separation.
    fn localize(&self, mut lo: f64, mut hi: f64, sep: &dyn Fn(f64, f64) -> Result<f64>) -> Result<f64> {
        while hi - lo > LOCALIZE_WIDTH {
            let mid = 0.5 * (lo + hi);
            if self.family.get(mid)?.crossing {
                return Ok(mid);
            }
            if sep(lo, mid)? >= sep(mid, hi)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn localize_parity(&self, mut lo: f64, mut hi: f64, lo_sign: f64) -> Result<f64> {
        while hi - lo > LOCALIZE_WIDTH {
            let mid = 0.5 * (lo + hi);
            let s = self.family.get(mid)?;
            if s.crossing {
                return Ok(mid);
            }
            match self.parity_of(&s) {
                Some(p) if p.signum() == lo_sign => lo = mid,
                _ => hi = mid,
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Candidate λ's from line-element, parity and per-channel jump scans, in that order.
    fn candidates(&self, grid: &[f64], rows: &BTreeMap<String, Vec<ResultRow>>, channels: &[Channel]) -> Vec<f64> {
        let clean: Vec<(f64, Arc<CurveState>)> = grid
            .iter()
            .filter_map(|&l| self.family.get(l).ok().map(|s| (l, s)))
            .filter(|(_, s)| !s.crossing)
            .collect();
        let mut found: Vec<f64> = Vec::new();

        let kinds = if self.config.distances.is_empty() { vec![DistanceKind::Trace] } else { self.config.distances.clone() };
        for kind in kinds {
            let seps: Vec<f64> = clean
                .windows(2)
                .map(|w| state_distance(&w[0].1.state, &w[1].1.state, kind).unwrap_or(0.0))
                .collect();
            for j in jump_intervals(&seps) {
                let sep = |a: f64, b: f64| -> Result<f64> {
                    state_distance(&self.family.get(a)?.state, &self.family.get(b)?.state, kind)
                };
                if let Ok(l) = self.localize(clean[j].0, clean[j + 1].0, &sep) {
                    found.push(l);
                }
            }
        }

        let signs: Vec<Option<f64>> = clean.iter().map(|(_, s)| self.parity_of(s).map(f64::signum)).collect();
        for j in 0..clean.len().saturating_sub(1) {
            if let (Some(a), Some(b)) = (signs[j], signs[j + 1]) {
                if a != b {
                    if let Ok(l) = self.localize_parity(clean[j].0, clean[j + 1].0, a) {
                        found.push(l);
                    }
                }
            }
        }

        for ch in channels {
            if matches!(ch.kind, ChannelKind::LineElement(_)) {
                continue;
            }
            let Some(rs) = rows.get(&ch.name) else { continue };
            let pts: Vec<(f64, f64)> = rs
                .iter()
                .filter(|r| self.family.get(r.lambda).map(|s| !s.crossing).unwrap_or(false))
                .filter_map(|r| r.value.map(|v| (r.lambda, v)))
                .collect();
            let diffs: Vec<f64> = pts.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
            for j in jump_intervals(&diffs) {
                let sep = |a: f64, b: f64| -> Result<f64> {
                    Ok((self.profile(&ch.kind, a)?.0 - self.profile(&ch.kind, b)?.0).abs())
                };
                if let Ok(l) = self.localize(pts[j].0, pts[j + 1].0, &sep) {
                    found.push(l);
                }
            }
        }
        merge_candidates(found, self.config.grid.spacing())
    }

    /// Auto bases built from the ground states at `λc ± δ_min`.
    fn auto_channels(&self, lambda_c: f64) -> Vec<Channel> {
        let step = self.finest();
        let (Ok(a), Ok(b)) = (self.family.get(lambda_c - step), self.family.get(lambda_c + step)) else {
            return Vec::new();
        };
        let (Some(before), Some(after)) = (a.state.as_pure(), b.state.as_pure()) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for spec in self.config.bases.iter().filter(|b| b.is_auto()) {
            let basis = match spec {
                BasisSpec::Theorem3Auto => probe::theorem3_basis(before, after),
                BasisSpec::ParityFourierAuto => probe::parity_fourier_basis(self.config.n_sites, before, after),
                _ => continue,
            };
            let Ok(basis) = basis else { continue };
            let label = format!("{}@{:.6}", spec.label(), lambda_c);
            for &m in self.config.measures.iter().filter(|m| m.uses_basis()) {
                out.extend(self.config.basis_channels(m, &label, &basis));
            }
        }
        out
    }

    fn examine(&self, lambda_c: f64, channels: &[Channel], auto: &[Channel]) -> Option<CriticalPointRecord> {
        let steps = &self.config.steps;
        let widest = steps[0];
        if !(self.in_range(lambda_c - widest) && self.in_range(lambda_c + widest)) {
            return None;
        }
        let mut evidence = Vec::new();
        let kinds = if self.config.distances.is_empty() { vec![DistanceKind::Trace] } else { self.config.distances.clone() };
        for kind in kinds {
            if let Ok(r) = probe::probe_line_element(&self.family, lambda_c, steps, kind) {
                evidence.push((format!("line_element_{kind}"), r));
            }
        }
        for ch in channels.iter().chain(auto) {
            if matches!(ch.kind, ChannelKind::LineElement(_)) {
                continue;
            }
            let f = |x: f64| self.profile(&ch.kind, x);
            if let Ok(r) = probe::probe_profile(&f, lambda_c, steps) {
                evidence.push((ch.name.clone(), r));
            }
        }

        let step = self.finest();
        let (a, b) = (self.family.get(lambda_c - step).ok()?, self.family.get(lambda_c + step).ok()?);
        let jump = |kind: &ChannelKind| -> Option<f64> {
            Some(self.channel_value(kind, &b).ok()? - self.channel_value(kind, &a).ok()?)
        };
        let berry_jump = jump(&ChannelKind::Berry);
        let order_jump = jump(&ChannelKind::Order);
        let parity_flip = match (self.parity_of(&a), self.parity_of(&b)) {
            (Some(x), Some(y)) => x.signum() != y.signum() && x.abs() > 0.5 && y.abs() > 0.5,
            _ => false,
        };

        let detecting: Vec<String> = evidence
            .iter()
            .filter(|(_, r)| r.classification != Classification::Finite)
            .map(|(name, _)| name.clone())
            .collect();
        if detecting.is_empty() && !parity_flip {
            return None;
        }
        let classification = evidence
            .iter()
            .map(|(_, r)| r.classification)
            .max_by_key(|c| match c {
                Classification::Divergent => 2,
                Classification::Cusp => 1,
                Classification::Finite => 0,
            })
            .unwrap_or(Classification::Finite);
        let mut bases: Vec<String> = auto
            .iter()
            .filter_map(|c| c.name.split_once('[').map(|(_, rest)| rest.trim_end_matches(']').to_string()))
            .collect();
        bases.sort();
        bases.dedup();
        Some(CriticalPointRecord {
            lambda_c,
            classification: classification.name().to_string(),
            detecting_measures: detecting,
            berry_jump,
            order_jump,
            parity_flip,
            bases,
            evidence: evidence.iter().map(|(n, r)| Evidence::from_report(n, r)).collect(),
        })
    }

    /// Reverse-triangle bound `|N(ρ_i+1) - N(ρ_i)| <= D(ρ_i+1, ρ_i)` on consecutive grid states.
    fn check_bounds(&self, grid: &[f64], rows: &BTreeMap<String, Vec<ResultRow>>, channels: &[Channel]) -> BoundStats {
        let mut stats = BoundStats::default();
        for ch in channels {
            let ChannelKind::Measure(m) = &ch.kind else { continue };
            let Some((kind, to_distance)) = m.distance_form() else { continue };
            let Some(rs) = rows.get(&ch.name) else { continue };
            for (j, w) in rs.windows(2).enumerate() {
                let (Some(x), Some(y)) = (w[0].value, w[1].value) else { continue };
                let (Ok(a), Ok(b)) = (self.family.get(grid[j]), self.family.get(grid[j + 1])) else { continue };
                let Ok(rhs) = state_distance(&b.state, &a.state, kind) else { continue };
                let excess = (to_distance(y) - to_distance(x)).abs() - rhs;
                stats.checked += 1;
                if excess > BOUND_SLACK {
                    stats.violations += 1;
                }
                stats.worst_excess = if stats.checked == 1 { excess } else { stats.worst_excess.max(excess) };
            }
        }
        stats
    }

    fn rows_for(&self, grid: &[f64], channels: &[Channel]) -> BTreeMap<String, Vec<ResultRow>> {
        let jobs: Vec<(usize, usize)> =
            (0..channels.len()).flat_map(|c| (0..grid.len()).map(move |i| (c, i))).collect();
        let computed: Vec<ResultRow> = jobs.par_iter().map(|&(c, i)| self.row(grid[i], &channels[c])).collect();
        let mut out: BTreeMap<String, Vec<ResultRow>> = BTreeMap::new();
        for ((c, _), row) in jobs.into_iter().zip(computed) {
            out.entry(channels[c].name.clone()).or_default().push(row);
        }
        out
    }

    fn states_for(&self, lambdas: &[f64]) {
        lambdas.par_iter().for_each(|&l| {
            let _ = self.family.get(l);
        });
    }

    fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            corrupt: self.corrupt.load(Ordering::Relaxed),
        }
    }
}

/// Intervals whose change stands out against both neighbours.
fn jump_intervals(d: &[f64]) -> Vec<usize> {
    (0..d.len())
        .filter(|&j| {
            let left = if j > 0 { d[j - 1] } else { 0.0 };
            let right = d.get(j + 1).copied().unwrap_or(0.0);
            d[j] > JUMP_FLOOR && d[j] > JUMP_FACTOR * left.max(right)
        })
        .collect()
}

/// Merges candidates closer than `spacing`, keeping the earliest-found
/// estimate, and sorts them.
fn merge_candidates(found: Vec<f64>, spacing: f64) -> Vec<f64> {
    let mut merged: Vec<f64> = Vec::new();
    for l in found {
        if !merged.iter().any(|m| (m - l).abs() < spacing) {
            merged.push(l);
        }
    }
    merged.sort_by(f64::total_cmp);
    merged
}

fn build_pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}

/// Evaluates every configured channel on the grid, detects critical points,
/// re-evaluates coherence in the bases rebuilt there, and returns rows
/// ordered by λ then measure name.
pub fn run_sweep(config: &SweepConfig, options: &RunOptions) -> Result<SweepOutcome> {
    config.validate()?;
    let pool = build_pool(options.parallelism)?;
    pool.install(|| {
        let sweeper = Sweeper::new(config, options.cache.as_ref());
        let grid = config.grid.values();
        let step = sweeper.finest();
        let mut needed: Vec<f64> = grid.clone();
        needed.extend(grid.iter().flat_map(|&l| [l - step, l + step]).filter(|&l| sweeper.in_range(l)));
        sweeper.states_for(&needed);

        let channels = config.static_channels();
        let mut rows = sweeper.rows_for(&grid, &channels);
        let candidates = sweeper.candidates(&grid, &rows, &channels);

        let examined: Vec<(Vec<Channel>, Option<CriticalPointRecord>)> = candidates
            .par_iter()
            .map(|&l| {
                let auto = sweeper.auto_channels(l);
                let record = sweeper.examine(l, &channels, &auto);
                (auto, record)
            })
            .collect();
        let mut criticals = Vec::new();
        let mut auto_channels = Vec::new();
        for (auto, record) in examined {
            if let Some(r) = record {
                criticals.push(r);
                auto_channels.extend(auto);
            }
        }
        rows.extend(sweeper.rows_for(&grid, &auto_channels));
        let mut all_channels = channels;
        all_channels.extend(auto_channels);
        let bounds = sweeper.check_bounds(&grid, &rows, &all_channels);

        let mut flat: Vec<ResultRow> = rows.into_values().flatten().collect();
        flat.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then_with(|| a.measure.cmp(&b.measure)));
        Ok(SweepOutcome { rows: flat, criticals, cache: sweeper.stats(), bounds })
    })
}

/// Rows of every static channel at one λ, without critical-point detection.
pub fn measure_at(config: &SweepConfig, lambda: f64, options: &RunOptions) -> Result<Vec<ResultRow>> {
    config.validate()?;
    if !config.curve.contains(lambda) {
        return Err(Error::OutOfRange { value: lambda, min: config.curve.lambda_min, max: config.curve.lambda_max });
    }
    let pool = build_pool(options.parallelism)?;
    pool.install(|| {
        let sweeper = Sweeper::new(config, options.cache.as_ref());
        let mut rows: Vec<ResultRow> = sweeper.rows_for(&[lambda], &config.static_channels()).into_values().flatten().collect();
        rows.sort_by(|a, b| a.measure.cmp(&b.measure));
        Ok(rows)
    })
}

/// Decimal with 12 significant digits, plain notation for moderate exponents.
pub fn format_sig12(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if v < 0.0 { "-" } else { "" };
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let trimmed = digits.trim_end_matches('0');
    let body = if (-5..12).contains(&exp) {
        if exp >= 0 {
            let e = exp as usize;
            let padded = format!("{trimmed:0<width$}", width = e + 1);
            let (int, frac) = padded.split_at(e + 1);
            if frac.is_empty() {
                int.to_string()
            } else {
                format!("{int}.{frac}")
            }
        } else {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), trimmed)
        }
    } else {
        let (first, rest) = trimmed.split_at(1);
        if rest.is_empty() {
            format!("{first}e{exp}")
        } else {
            format!("{first}.{rest}e{exp}")
        }
    };
    format!("{sign}{body}")
}

pub const CSV_HEADER: &str = "lambda,delta,h,beta,measure,value,d1,d2,flags";

fn csv_number(v: Option<f64>) -> String {
    v.map(format_sig12).unwrap_or_default()
}

pub fn emit_csv(rows: &[ResultRow], out: &mut dyn Write) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidState("no rows to write".into()));
    }
    let mut text = String::with_capacity(64 * (rows.len() + 1));
    text.push_str(CSV_HEADER);
    text.push('\n');
    for r in rows {
        let flags: Vec<&str> = r.flags.iter().map(|f| f.name()).collect();
        let beta = r.beta.map(format_sig12).unwrap_or_else(|| "inf".into());
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{},{}",
            format_sig12(r.lambda),
            csv_number(r.delta),
            csv_number(r.h),
            beta,
            r.measure,
            csv_number(r.value),
            csv_number(r.d1),
            csv_number(r.d2),
            flags.join(";")
        );
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// Parses text written by [`emit_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Config("csv: unexpected header".into()));
    }
    let num = |s: &str, line: usize| -> Result<Option<f64>> {
        if s.is_empty() {
            return Ok(None);
        }
        s.parse::<f64>().map(Some).map_err(|_| Error::Config(format!("csv line {line}: bad number `{s}`")))
    };
    lines
        .enumerate()
        .map(|(i, l)| {
            let line = i + 2;
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 9 {
                return Err(Error::Config(format!("csv line {line}: expected 9 fields")));
            }
            let flags = if f[8].is_empty() {
                Vec::new()
            } else {
                f[8].split(';')
                    .map(|t| Flag::from_name(t).ok_or_else(|| Error::Config(format!("csv line {line}: flag `{t}`"))))
                    .collect::<Result<Vec<_>>>()?
            };
            Ok(ResultRow {
                lambda: num(f[0], line)?.ok_or_else(|| Error::Config(format!("csv line {line}: missing lambda")))?,
                delta: num(f[1], line)?,
                h: num(f[2], line)?,
                beta: if f[3] == "inf" { None } else { num(f[3], line)? },
                measure: f[4].to_string(),
                value: num(f[5], line)?,
                d1: num(f[6], line)?,
                d2: num(f[7], line)?,
                flags,
                note: None,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    model: ReportModel,
    curve: ReportCurve,
    grid: ReportGrid<'a>,
    measures: Vec<&'static str>,
    bases: Vec<&'a str>,
    distances: Vec<&'static str>,
    critical_points: &'a [CriticalPointRecord],
}

#[derive(Serialize)]
struct ReportModel {
    n_sites: usize,
    boundary: &'static str,
    split: String,
}

#[derive(Serialize)]
struct ReportCurve {
    delta: String,
    h: String,
    beta: String,
}

#[derive(Serialize)]
struct ReportGrid<'a> {
    lambda_min: f64,
    lambda_max: f64,
    points: usize,
    steps: &'a [f64],
}

/// Structured JSON document listing each critical point with its evidence.
pub fn emit_report(criticals: &[CriticalPointRecord], config: &SweepConfig) -> Result<String> {
    let doc = ReportDocument {
        model: ReportModel { n_sites: config.n_sites, boundary: config.boundary.name(), split: config.split.label() },
        curve: ReportCurve {
            delta: config.curve.delta.to_string(),
            h: config.curve.h.to_string(),
            beta: config.curve.beta.as_ref().map_or_else(|| model::ZERO_TEMPERATURE.to_string(), |b| b.to_string()),
        },
        grid: ReportGrid {
            lambda_min: config.grid.lambda_min,
            lambda_max: config.grid.lambda_max,
            points: config.grid.points,
            steps: &config.steps,
        },
        measures: config.measures.iter().map(|m| m.name()).collect(),
        bases: config.bases.iter().map(|b| b.label()).collect(),
        distances: config.distances.iter().map(|d| d.name()).collect(),
        critical_points: criticals,
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::InvalidState(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Hex digest naming one cached row.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CacheKey(String);

impl CacheKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn cache_key_from(fingerprint: &str, lambda: f64, step: f64, channel: &Channel) -> CacheKey {
    let mut h = Sha256::new();
    h.update(b"ncqpt-row-v1\n");
    h.update(fingerprint.as_bytes());
    h.update(b"\n");
    h.update(lambda.to_bits().to_le_bytes());
    h.update(step.to_bits().to_le_bytes());
    h.update(channel.fingerprint().as_bytes());
    CacheKey(hex::encode(h.finalize()))
}

/// Content hash of everything that affects one row.
pub fn cache_key(config: &SweepConfig, lambda: f64, step: f64, channel: &Channel) -> CacheKey {
    cache_key_from(&config.fingerprint(), lambda, step, channel)
}

enum Lookup {
    Hit(ResultRow),
    Miss,
    Corrupt,
}

/// One file per key; each file holds a checksum line and the serialized row.
#[derive(Clone, Debug)]
pub struct ResultCache {
    dir: PathBuf,
}

impl ResultCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(ResultCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(&key.0)
    }

    fn lookup(&self, key: &CacheKey) -> Lookup {
        let Ok(text) = std::fs::read_to_string(self.path(key)) else { return Lookup::Miss };
        match decode_entry(&text) {
            Ok(row) => Lookup::Hit(row),
            Err(_) => Lookup::Corrupt,
        }
    }

    /// `Ok(None)` on a miss; corrupt entries are an error.
    pub fn get(&self, key: &CacheKey) -> Result<Option<ResultRow>> {
        match std::fs::read_to_string(self.path(key)) {
            Ok(text) => decode_entry(&text).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Atomic: written to a temporary file in the cache directory, then renamed.
    pub fn put(&self, key: &CacheKey, row: &ResultRow) -> Result<()> {
        let body = serde_json::to_string(row).map_err(|e| Error::InvalidState(e.to_string()))?;
        let checksum = hex::encode(Sha256::digest(body.as_bytes()));
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        writeln!(tmp, "{checksum}")?;
        writeln!(tmp, "{body}")?;
        tmp.persist(self.path(key)).map_err(|e| Error::Io(e.error))?;
        Ok(())
    }
}

fn decode_entry(text: &str) -> Result<ResultRow> {
    let (checksum, body) = text.split_once('\n').ok_or_else(|| Error::CacheCorrupt("truncated entry".into()))?;
    let body = body.strip_suffix('\n').unwrap_or(body);
    if hex::encode(Sha256::digest(body.as_bytes())) != checksum {
        return Err(Error::CacheCorrupt("checksum mismatch".into()));
    }
    serde_json::from_str(body).map_err(|e| Error::CacheCorrupt(e.to_string()))
}

/// Pure state at λ from a config; convenience for callers outside a sweep.
pub fn ground_state_at(config: &SweepConfig, lambda: f64) -> Result<PureState> {
    match config.family().state_at(lambda)?.state {
        QuantumState::Pure(p) => Ok(p),
        QuantumState::Mixed(_) => Err(Error::Unsupported("thermal curve has no ground state".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn radial_config(theta: f64, points: usize, measures: Vec<MeasureName>) -> SweepConfig {
        SweepConfig::new(2, CurveSpec::radial(theta, 0.5, 1.5), points, measures).unwrap()
    }

    fn serial() -> RunOptions {
        RunOptions { parallelism: 2, cache: None }
    }

    #[test]
    fn format_examples() {
        assert_eq!(format_sig12(1.0), "1");
        assert_eq!(format_sig12(-0.25), "-0.25");
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig12(123456.789), "123456.789");
        assert_eq!(format_sig12(1e-7), "1e-7");
        assert_eq!(format_sig12(2.5e15), "2.5e15");
        assert_eq!(format_sig12(0.0001234), "0.0001234");
        assert_eq!(format_sig12(9.9999999999996), "10");
    }

    #[test]
    fn format_round_trip() {
        for v in [PI, -1e-9 / 7.0, 6.02214076e23, 1.0 - 1e-13, 0.1, 12345678901.234] {
            let s = format_sig12(v);
            let back: f64 = s.parse().unwrap();
            let reference: f64 = format!("{v:.11e}").parse().unwrap();
            assert_eq!(back, reference, "{s}");
            assert_eq!(format_sig12(back), s);
        }
    }

    #[test]
    fn radial_sweep_finds_the_circle() {
        let out = run_sweep(&radial_config(PI / 4.0, 101, vec![MeasureName::CoherenceL1]), &serial()).unwrap();
        assert_eq!(out.rows.len(), 101);
        assert_eq!(out.criticals.len(), 1, "{:?}", out.criticals);
        let c = &out.criticals[0];
        assert!((c.lambda_c - 1.0).abs() < 0.01);
        assert_eq!(c.classification, "divergent");
        assert!(c.detecting_measures.contains(&"coherence_l1[computational]".to_string()));
        let berry = c.berry_jump.unwrap().abs();
        assert!((berry - 2.0 * PI * (PI / 4.0).cos()).abs() < 0.05 * berry);
        let at_one = out.rows.iter().find(|r| r.lambda == 1.0).unwrap();
        assert!(at_one.has(Flag::Crossing));
        assert_eq!(out.bounds.violations, 0);
    }

    #[test]
    fn entanglement_blind_transition() {
        let mut config = radial_config(PI / 2.0, 51, vec![MeasureName::CoherenceL1, MeasureName::GeometricEntanglement]);
        config.bases = vec![BasisSpec::Theorem3Auto];
        let out = run_sweep(&config, &serial()).unwrap();
        assert_eq!(out.criticals.len(), 1);
        let c = &out.criticals[0];
        assert!((c.lambda_c - 1.0).abs() < 0.01);
        assert!(!c.detecting_measures.iter().any(|m| m.starts_with("geometric_entanglement")));
        assert!(c.detecting_measures.iter().any(|m| m.starts_with("coherence_l1[theorem3_auto@")), "{c:?}");
        assert!(out.rows.iter().any(|r| r.measure.starts_with("coherence_l1[theorem3_auto@")));
    }

    #[test]
    fn empty_measure_list_is_rejected() {
        let err = SweepConfig::new(2, CurveSpec::radial(0.3, 0.5, 1.5), 11, vec![]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn steps_must_fit_the_grid() {
        let mut c = radial_config(0.3, 11, vec![MeasureName::CoherenceL1]);
        c.steps = vec![0.2, 0.1, 0.05];
        assert!(c.validate().is_err());
        c.steps = vec![1e-2, 1e-2, 5e-3];
        assert!(c.validate().is_err());
    }

    #[test]
    fn csv_contract() {
        let row = ResultRow {
            lambda: 1.0,
            delta: Some(0.7071067811865476),
            h: Some(0.7071067811865475),
            beta: None,
            measure: "coherence_l1[computational]".into(),
            value: Some(1.0),
            d1: None,
            d2: None,
            flags: vec![Flag::Crossing, Flag::Edge],
            note: None,
        };
        let mut buf = Vec::new();
        emit_csv(std::slice::from_ref(&row), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().ends_with(",crossing;edge"));
        let back = parse_csv(&text).unwrap();
        assert_eq!(back[0].delta, Some(0.707106781187));
        assert_eq!(back[0].flags, row.flags);
        assert!(emit_csv(&[], &mut Vec::new()).is_err());
    }

    #[test]
    fn report_without_criticals() {
        let c = radial_config(0.3, 11, vec![MeasureName::CoherenceL1]);
        let doc = emit_report(&[], &c).unwrap();
        let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["critical_points"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn cache_keys_separate_inputs() {
        let c = radial_config(0.3, 11, vec![MeasureName::CoherenceL1]);
        let ch = &c.static_channels()[0];
        let k = cache_key(&c, 0.7, 1e-2, ch);
        assert_eq!(k, cache_key(&c, 0.7, 1e-2, ch));
        assert_ne!(k, cache_key(&c, 0.7, 5e-3, ch));
        let mut other = c.clone();
        other.bases = vec![BasisSpec::BellType2q];
        assert_ne!(k, cache_key(&other, 0.7, 1e-2, &other.static_channels()[0]));
    }

    #[test]
    fn cache_round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResultCache::open(dir.path()).unwrap();
        let c = radial_config(0.3, 11, vec![MeasureName::CoherenceL1]);
        let options = RunOptions { parallelism: 2, cache: Some(cache.clone()) };
        let first = run_sweep(&c, &options).unwrap();
        assert_eq!(first.cache.hits, 0);
        let second = run_sweep(&c, &options).unwrap();
        assert_eq!(second.cache.misses, 0);
        assert_eq!(second.cache.hits, first.rows.len());
        assert_eq!(first.rows, second.rows);

        let key = cache_key(&c, c.grid.values()[3], 2.5e-3, &c.static_channels()[0]);
        let path = dir.path().join(key.as_str());
        let mut text = std::fs::read_to_string(&path).unwrap();
        text = text.replacen("coherence", "coherencf", 1);
        std::fs::write(&path, text).unwrap();
        assert!(matches!(cache.get(&key), Err(Error::CacheCorrupt(_))));
        let third = run_sweep(&c, &options).unwrap();
        assert_eq!(third.cache.corrupt, 1);
        assert_eq!(third.rows, first.rows);
    }

    #[test]
    fn jump_detection_helpers() {
        assert_eq!(jump_intervals(&[0.01, 0.01, 0.9, 0.01]), vec![2]);
        assert!(jump_intervals(&[0.1, 0.1, 0.1]).is_empty());
        assert_eq!(merge_candidates(vec![1.0, 0.5, 1.001], 0.01), vec![0.5, 1.0]);
    }
}
