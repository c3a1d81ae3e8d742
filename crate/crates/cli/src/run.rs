//! Drives a maintainer over a parsed stream.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use fieldrank::linalg::{det_oracle, in_span_oracle, rank_oracle};
use fieldrank::oracle;
use fieldrank::{
    BipartiteMatching, CombiMatcher, DenseMatrix, DynRank, FieldElement, FieldRng, GeneralMatching,
    LowRankBasis, MatchedVertexSet, PlainBasis, PrimeField, RankStructure, SparseVec,
    SubmatrixState, UnboundedRank, WeightedMatching, DEFAULT_PRIME,
};
use serde_json::{json, Value};
use thiserror::Error;

use crate::stream::{Kind, Op, UpdateStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Rank,
    RankExact,
    Basis,
    Submatrix,
    MatchGeneral,
    MatchBipartite,
    MatchWeighted,
    Vset,
    Combi,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "rank" => Mode::Rank,
            "rank-exact" => Mode::RankExact,
            "basis" => Mode::Basis,
            "submatrix" => Mode::Submatrix,
            "match-general" => Mode::MatchGeneral,
            "match-bipartite" => Mode::MatchBipartite,
            "match-weighted" => Mode::MatchWeighted,
            "vset" => Mode::Vset,
            "combi" => Mode::Combi,
            _ => return Err(format!("unknown mode `{s}`")),
        })
    }
}

impl Mode {
    fn accepts(self, kind: Kind) -> bool {
        matches!(
            (self, kind),
            (
                Mode::Rank | Mode::RankExact | Mode::Basis | Mode::Submatrix,
                Kind::Matrix { .. }
            ) | (Mode::MatchGeneral | Mode::Vset, Kind::Graph { .. })
                | (Mode::MatchBipartite | Mode::Combi, Kind::Bipartite { .. })
                | (Mode::MatchWeighted, Kind::Weighted { .. })
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub prime: Option<u64>,
    pub seed: Option<u64>,
    pub copies: Option<usize>,
    pub verify: bool,
    pub stats: bool,
    pub worst_case_spread: bool,
    pub low_rank: bool,
    pub dump_gadget_dot: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("mode does not accept a {0} stream")]
    ModeMismatch(&'static str),
    #[error("line {line}: verification failed: {msg}")]
    VerifyFailure { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Core {
        line: usize,
        #[source]
        source: fieldrank::Error,
    },
    #[error(transparent)]
    Field(#[from] fieldrank::GfError),
    #[error("writing gadget: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::VerifyFailure { .. } => 2,
            RunError::Core {
                source: fieldrank::Error::ProbabilisticFailure(_),
                ..
            } => 3,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutput {
    pub lines: Vec<String>,
    pub stats: Option<Value>,
}

impl RunOutput {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        if let Some(s) = &self.stats {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(s).expect("json"));
        }
        out
    }
}

fn list(v: &[usize]) -> String {
    v.iter()
        .map(|x| (x + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// One maintainer plus the shadow state needed for deltas and checks.
enum Engine {
    Rank(UnboundedRank),
    RankExact(DynRank),
    Basis(Box<dyn BasisLike>),
    Submatrix(SubmatrixState),
    General(GeneralMatching),
    Bipartite(BipartiteMatching),
    Weighted(WeightedMatching),
    Vset(MatchedVertexSet),
    Combi(CombiMatcher, usize),
}

trait BasisLike {
    fn set_column(&mut self, j: usize, values: &[FieldElement]) -> fieldrank::Result<Vec<usize>>;
    fn basis(&self) -> Vec<usize>;
    fn max_probes(&self) -> u32;
    fn mults(&self) -> u64;
}

impl<R: RankStructure> BasisLike for fieldrank::BasisMaintainer<R> {
    fn set_column(&mut self, j: usize, values: &[FieldElement]) -> fieldrank::Result<Vec<usize>> {
        fieldrank::BasisMaintainer::set_column(self, j, values)
    }

    fn basis(&self) -> Vec<usize> {
        fieldrank::BasisMaintainer::basis(self)
    }

    fn max_probes(&self) -> u32 {
        fieldrank::BasisMaintainer::max_probes(self)
    }

    fn mults(&self) -> u64 {
        self.rank_structure().mults()
    }
}

struct Runner {
    field: PrimeField,
    engine: Engine,
    a: DenseMatrix,
    edges: std::collections::BTreeMap<(usize, usize), i64>,
}

fn core(line: usize) -> impl Fn(fieldrank::Error) -> RunError {
    move |source| RunError::Core { line, source }
}

impl Runner {
    fn new(
        stream: &UpdateStream,
        mode: Mode,
        opts: &Options,
        field: PrimeField,
        seed: u64,
    ) -> Result<Self, RunError> {
        let mut rng = FieldRng::new(seed);
        let init = core(0);
        let mut a = DenseMatrix::zeros(0, 0);
        let mut edges = std::collections::BTreeMap::new();
        match stream.kind {
            Kind::Matrix { n } => {
                a = DenseMatrix::zeros(n, n);
                for op in &stream.setup {
                    if let Op::Entry { i, j, value } = *op {
                        a.set(i, j, field.from_i64(value));
                    }
                }
            }
            _ => {
                for op in &stream.setup {
                    if let Op::Insert { u, v, w } = *op {
                        let key = match stream.kind {
                            Kind::Graph { .. } => (u.min(v), u.max(v)),
                            _ => (u, v),
                        };
                        edges.insert(key, w.unwrap_or(1));
                    }
                }
            }
        }
        let keys: Vec<(usize, usize)> = edges.keys().copied().collect();
        let unbounded = |a: &DenseMatrix, rng: &mut FieldRng| -> Result<UnboundedRank, RunError> {
            let mut r = match opts.copies {
                Some(c) => UnboundedRank::with_copies(field, a, c, rng),
                None => UnboundedRank::new(field, a, rng),
            }
            .map_err(core(0))?;
            r.set_worst_case_spread(opts.worst_case_spread);
            Ok(r)
        };
        let engine = match (mode, stream.kind) {
            (Mode::Rank, _) => Engine::Rank(unbounded(&a, &mut rng)?),
            (Mode::RankExact, _) => Engine::RankExact(DynRank::new(field, &a)),
            (Mode::Basis, _) if opts.low_rank => Engine::Basis(Box::new(
                LowRankBasis::low_rank(field, a.clone(), rng).map_err(init)?,
            )),
            (Mode::Basis, _) => Engine::Basis(Box::new(
                PlainBasis::plain(field, a.clone(), rng).map_err(init)?,
            )),
            (Mode::Submatrix, _) => {
                Engine::Submatrix(SubmatrixState::new(field, a.clone(), rng).map_err(init)?)
            }
            (Mode::MatchGeneral, Kind::Graph { n }) => {
                let mut g = GeneralMatching::with_edges(field, n, &keys, rng).map_err(init)?;
                g.set_worst_case_spread(opts.worst_case_spread);
                Engine::General(g)
            }
            (Mode::MatchBipartite, Kind::Bipartite { left, right }) => {
                let mut b =
                    BipartiteMatching::with_edges(field, left, right, &keys, rng).map_err(init)?;
                b.set_worst_case_spread(opts.worst_case_spread);
                Engine::Bipartite(b)
            }
            (Mode::MatchWeighted, Kind::Weighted { left, right, w_max }) => {
                let mut w =
                    WeightedMatching::new(field, left, right, w_max, rng).map_err(core(0))?;
                w.set_worst_case_spread(opts.worst_case_spread);
                for (&(u, v), &wt) in &edges {
                    w.set_weight(u, v, wt).map_err(core(0))?;
                }
                Engine::Weighted(w)
            }
            (Mode::Vset, Kind::Graph { n }) => {
                let mut s = MatchedVertexSet::new(field, n, rng).map_err(init)?;
                for &(u, v) in &keys {
                    s.insert(u, v).map_err(core(0))?;
                }
                Engine::Vset(s)
            }
            (Mode::Combi, Kind::Bipartite { left, right }) => {
                let mut c = CombiMatcher::new(left, right);
                for &(u, v) in &keys {
                    c.insert(u, left + v).map_err(core(0))?;
                }
                Engine::Combi(c, left)
            }
            _ => return Err(RunError::ModeMismatch(stream.kind.name())),
        };
        Ok(Runner {
            field,
            engine,
            a,
            edges,
        })
    }

    fn apply(&mut self, line: usize, op: &Op) -> Result<String, RunError> {
        let f = self.field;
        let err = core(line);
        match (&mut self.engine, op) {
            (
                Engine::Rank(_) | Engine::RankExact(_) | Engine::Basis(_) | Engine::Submatrix(_),
                op,
            ) => {
                let sets: Vec<(usize, usize, FieldElement)> = match op {
                    Op::Entry { i, j, value } => vec![(*i, *j, f.from_i64(*value))],
                    Op::Column { j, entries } => entries
                        .iter()
                        .map(|&(i, v)| (i, *j, f.from_i64(v)))
                        .collect(),
                    _ => unreachable!("parser admits only matrix ops"),
                };
                let col = match op {
                    Op::Entry { j, .. } | Op::Column { j, .. } => *j,
                    _ => unreachable!(),
                };
                let mut diff = vec![FieldElement::ZERO; self.a.rows()];
                for &(i, j, v) in &sets {
                    diff[i] = f.add(diff[i], f.sub(v, self.a.get(i, j)));
                    self.a.set(i, j, v);
                }
                let delta = SparseVec::from_dense(&diff);
                match &mut self.engine {
                    Engine::Rank(r) => {
                        r.column_update(col, &delta).map_err(err)?;
                        Ok(format!("rank={}", r.rank()))
                    }
                    Engine::RankExact(r) => {
                        r.column_update(col, &delta).map_err(err)?;
                        Ok(format!("rank={}", RankStructure::rank(r)))
                    }
                    Engine::Basis(b) => {
                        let basis = b.set_column(col, &self.a.column(col)).map_err(err)?;
                        Ok(format!("basis={}", list(&basis)))
                    }
                    Engine::Submatrix(s) => {
                        for &(i, j, v) in &sets {
                            s.entry_update(i, j, v).map_err(&err)?;
                        }
                        Ok(format!("rows={} cols={}", list(&s.rows()), list(&s.cols())))
                    }
                    _ => unreachable!(),
                }
            }
            (Engine::General(g), Op::Insert { u, v, .. } | Op::Delete { u, v }) => {
                let present = matches!(op, Op::Insert { .. });
                let size = g.set_edge(*u, *v, present).map_err(err)?;
                self.track(*u.min(v), *u.max(v), present.then_some(1));
                Ok(format!("match={size}"))
            }
            (Engine::Vset(s), Op::Insert { u, v, .. } | Op::Delete { u, v }) => {
                let present = matches!(op, Op::Insert { .. });
                let set = s.set_edge(*u, *v, present).map_err(err)?;
                self.track(*u.min(v), *u.max(v), present.then_some(1));
                Ok(format!("vset={}", list(&set)))
            }
            (Engine::Bipartite(b), Op::Insert { u, v, .. } | Op::Delete { u, v }) => {
                let present = matches!(op, Op::Insert { .. });
                let size = b.set_edge(*u, *v, present).map_err(err)?;
                self.track(*u, *v, present.then_some(1));
                Ok(format!("match={size}"))
            }
            (Engine::Combi(c, left), Op::Insert { u, v, .. } | Op::Delete { u, v }) => {
                let left = *left;
                let m = if matches!(op, Op::Insert { .. }) {
                    c.insert(*u, left + v)
                } else {
                    c.delete(*u, left + v)
                }
                .map_err(err)?;
                self.track(*u, *v, matches!(op, Op::Insert { .. }).then_some(1));
                let parts: Vec<String> = m
                    .iter()
                    .map(|&(a, b)| format!("{}-{}", a + 1, b - left + 1))
                    .collect();
                Ok(format!("edges={}", parts.join(",")))
            }
            (Engine::Weighted(w), op) => {
                let (u, v, wt) = match *op {
                    Op::Insert { u, v, w } => (u, v, w.unwrap_or(1)),
                    Op::Delete { u, v } => (u, v, 0),
                    Op::Weight { u, v, w } => (u, v, w),
                    _ => unreachable!("parser admits only graph ops"),
                };
                let k = w.set_weight(u, v, wt).map_err(err)?;
                self.track(u, v, (wt > 0).then_some(wt));
                Ok(format!("weight={k}"))
            }
            _ => unreachable!("parser admits only ops of the stream's kind"),
        }
    }

    fn track(&mut self, u: usize, v: usize, w: Option<i64>) {
        match w {
            Some(w) => self.edges.insert((u, v), w),
            None => self.edges.remove(&(u, v)),
        };
    }

    fn verify(&self) -> Result<(), String> {
        let f = &self.field;
        let keys: Vec<(usize, usize)> = self.edges.keys().copied().collect();
        match &self.engine {
            Engine::Rank(r) => expect_eq("rank", r.rank(), rank_oracle(f, &self.a)),
            Engine::RankExact(r) => {
                expect_eq("rank", RankStructure::rank(r), rank_oracle(f, &self.a))
            }
            Engine::Basis(b) => {
                let basis = b.basis();
                let all: Vec<usize> = (0..self.a.rows()).collect();
                let sub = self.a.submatrix(&all, &basis).map_err(|e| e.to_string())?;
                expect_eq("independent columns", rank_oracle(f, &sub), basis.len())?;
                expect_eq("basis size", basis.len(), rank_oracle(f, &self.a))?;
                for c in 0..self.a.cols() {
                    if !in_span_oracle(f, &sub, &self.a.column(c)).map_err(|e| e.to_string())? {
                        return Err(format!("column {} outside the span", c + 1));
                    }
                }
                Ok(())
            }
            Engine::Submatrix(s) => {
                let (i, j) = (s.rows(), s.cols());
                let m = self.a.submatrix(&i, &j).map_err(|e| e.to_string())?;
                if det_oracle(f, &m).map_err(|e| e.to_string())?.is_zero() {
                    return Err("selected minor is singular".into());
                }
                expect_eq("minor size", i.len(), rank_oracle(f, &self.a))
            }
            Engine::General(g) => expect_eq(
                "match",
                g.size(),
                oracle::general_matching_size(g.vertices(), &keys),
            ),
            Engine::Bipartite(b) => {
                let (l, r) = b.sides();
                expect_eq(
                    "match",
                    b.size(),
                    oracle::bipartite_matching_size(l, r, &keys),
                )
            }
            Engine::Weighted(w) => {
                let (l, r, split) = w.split_graph();
                expect_eq(
                    "weight",
                    w.weight() as usize,
                    oracle::bipartite_matching_size(l, r, &split),
                )?;
                let (left, right) = w.sides();
                if right <= 16 {
                    let best = oracle::max_weight_bipartite(left, right, &w.edges());
                    expect_eq("weight", w.weight() as usize, best as usize)?;
                }
                Ok(())
            }
            Engine::Vset(s) => {
                let set = s.vertex_set();
                let n = s.submatrix().n();
                expect_eq(
                    "vset size",
                    set.len(),
                    2 * oracle::general_matching_size(n, &keys),
                )?;
                if oracle::has_perfect_matching(&set, &keys) {
                    Ok(())
                } else {
                    Err("vertex set has no perfect matching".into())
                }
            }
            Engine::Combi(c, _) => {
                if c.check() {
                    Ok(())
                } else {
                    Err("matching is not maximum".into())
                }
            }
        }
    }

    fn stats(&self, updates: usize) -> Value {
        let body = match &self.engine {
            Engine::Rank(r) => json!({
                "field_mults": r.mults(),
                "propagation_mults": r.propagation_mults(),
                "inner_mults": r.inner_mults(),
                "activations": r.activations(),
                "level": r.level(),
            }),
            Engine::RankExact(r) => json!({ "field_mults": r.mults() }),
            Engine::Basis(b) => json!({ "field_mults": b.mults(), "max_probes": b.max_probes() }),
            Engine::Submatrix(s) => {
                let st = s.stats();
                json!({
                    "field_mults": s.detector_mults(),
                    "searches": st.searches,
                    "probes": st.probes,
                    "max_probes": st.max_probes,
                    "resamples": st.resamples,
                })
            }
            Engine::General(g) => json!({ "field_mults": g.rank_structure().mults() }),
            Engine::Bipartite(b) => json!({ "field_mults": b.rank_structure().mults() }),
            Engine::Weighted(w) => json!({ "field_mults": w.rank_structure().mults() }),
            Engine::Vset(v) => {
                let st = v.submatrix().stats();
                json!({
                    "field_mults": v.submatrix().detector_mults(),
                    "searches": st.searches,
                    "probes": st.probes,
                    "max_probes": st.max_probes,
                })
            }
            Engine::Combi(c, _) => {
                json!({ "steps": c.graph().steps(), "augmentations": c.augmentations() })
            }
        };
        json!({ "updates": updates, "counters": body })
    }

    fn gadget_dot(&self) -> Option<String> {
        match &self.engine {
            Engine::Submatrix(s) => Some(s.gadget().to_dot()),
            Engine::Vset(v) => Some(v.submatrix().gadget().to_dot()),
            _ => None,
        }
    }
}

fn expect_eq(what: &str, got: usize, want: usize) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: reported {got}, oracle {want}"))
    }
}

/// Replays `stream` in `mode` and returns the output lines.
pub fn run(stream: &UpdateStream, mode: Mode, opts: &Options) -> Result<RunOutput, RunError> {
    if !mode.accepts(stream.kind) {
        return Err(RunError::ModeMismatch(stream.kind.name()));
    }
    let p = opts.prime.or(stream.prime).unwrap_or(DEFAULT_PRIME as u64);
    let field = PrimeField::new(p)?;
    let seed = opts.seed.or(stream.seed).unwrap_or(1);
    let mut runner = Runner::new(stream, mode, opts, field, seed)?;
    let mut out = RunOutput::default();
    for (line, op) in &stream.updates {
        out.lines.push(runner.apply(*line, op)?);
        if opts.verify {
            runner
                .verify()
                .map_err(|msg| RunError::VerifyFailure { line: *line, msg })?;
        }
    }
    if opts.stats {
        out.stats = Some(runner.stats(stream.updates.len()));
    }
    if let Some(path) = &opts.dump_gadget_dot {
        if let Some(dot) = runner.gadget_dot() {
            std::fs::write(path, dot)?;
        }
    }
    Ok(out)
}
