//! Fairness verification: per-group positive predictive values (PPVs) as
//! SSAT probabilities, their extremes, and the metrics derived from them.
//!
//! Two pipelines compute the extremes. [`verify_by_enumeration`] solves
//! one randomized-then-existential formula per compound group, with
//! probabilities estimated inside the group. [`verify_by_learning`] solves
//! one existential-then-randomized formula whose witness is the most
//! favored group, and the universal-random dual for the least favored one;
//! it uses probabilities estimated over all rows.

mod metrics;
mod report;

use std::time::Instant;

pub use metrics::{disparate_impact, equalized_odds, required_sample_size, statistical_parity, SampleSizeQuery};
pub use report::{
    CrossCheck, EqualizedOdds, FairnessReport, Guideline, MetricValues, PipelineReport, PpvRecord, Stats,
};

use crate::distribution::{
    discretize, enumerate_groups, estimate_probs, group_of, group_to_unit_clauses, model_thresholds,
    BooleanDataset, CompoundGroup, Context, FeatureMap, ProbabilityTable, RawTable, Schema,
};
use crate::encoders::{bin_implications, ClassifierModel, EncodeOptions, EncodedModel, ModelSpec};
use crate::error::{Error, Result};
use crate::ssat::{evaluate, solve_ur, Clause, CnfFormula, Negation, Quantifier, SsatFormula, UrFormula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Enum,
    Learn,
    /// Both pipelines, plus a check that learning agrees with enumeration
    /// over unconditioned probabilities.
    Both,
}

/// Which metrics to compute. DI and SP share one run; EO needs two more.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricSet {
    pub di: bool,
    pub sp: bool,
    pub eo: bool,
}

impl Default for MetricSet {
    fn default() -> Self {
        MetricSet {
            di: true,
            sp: true,
            eo: true,
        }
    }
}

impl std::str::FromStr for MetricSet {
    type Err = Error;

    /// Comma-separated subset of `di`, `sp`, `eo`.
    fn from_str(s: &str) -> Result<MetricSet> {
        let mut m = MetricSet {
            di: false,
            sp: false,
            eo: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.to_ascii_lowercase().as_str() {
                "di" => m.di = true,
                "sp" => m.sp = true,
                "eo" => m.eo = true,
                other => return Err(Error::validation(format!("unknown metric `{other}`"))),
            }
        }
        if !(m.di || m.sp || m.eo) {
            return Err(Error::validation("no metrics selected"));
        }
        Ok(m)
    }
}

const ROUNDING_SLACK: f64 = 1e-12;

/// Tolerance of the `both`-mode agreement check.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub metrics: MetricSet,
    /// Add `(¬stronger ∨ weaker)` between nested threshold variables.
    pub bin_implications: bool,
    /// Solve enumeration groups in parallel.
    pub parallel: bool,
    /// Record wall time in the report, which makes it nondeterministic.
    pub timings: bool,
    /// Parameters of the sample-size guideline attached to reports.
    pub epsilon0: f64,
    pub delta: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            metrics: MetricSet::default(),
            bin_implications: false,
            parallel: true,
            timings: false,
            epsilon0: 1.1,
            delta: 0.05,
        }
    }
}

/// An encoded classifier together with the Booleanized data it is audited
/// against.
#[derive(Debug, Clone)]
pub struct Problem {
    pub model: EncodedModel,
    pub data: BooleanDataset,
    pub map: FeatureMap,
}

impl Problem {
    pub fn new(model: &ClassifierModel, data: BooleanDataset, map: FeatureMap, options: EncodeOptions) -> Result<Problem> {
        if data.num_vars() != map.num_vars() as usize {
            return Err(Error::structure(format!(
                "dataset has {} variables, feature map {}",
                data.num_vars(),
                map.num_vars()
            )));
        }
        let model = model.encode(map.num_vars(), options)?;
        Ok(Problem { model, data, map })
    }

    /// Booleanizes `table` with the thresholds the model tests, resolves
    /// the model's feature names and encodes it.
    pub fn from_sources(
        schema: &Schema,
        table: &RawTable,
        spec: &ModelSpec,
        bins: Option<usize>,
        options: EncodeOptions,
    ) -> Result<Problem> {
        let thresholds = model_thresholds(schema, &spec.feature_names());
        let (data, map) = discretize(table, schema, &thresholds, bins)?;
        let model = spec.resolve(|name| map.lookup(name))?;
        Problem::new(&model, data, map, options)
    }

    fn support(&self, options: &VerifyOptions) -> Vec<Clause> {
        if !options.bin_implications {
            return Vec::new();
        }
        self.map.threshold_chains().iter().flat_map(|c| bin_implications(c)).collect()
    }

    fn num_vars(&self) -> u32 {
        self.model.positive.cnf.num_vars().max(self.map.num_vars())
    }

    fn random_prefix(&self, probs: &ProbabilityTable) -> Result<Vec<(crate::ssat::Var, Quantifier)>> {
        self.map
            .random_vars()
            .into_iter()
            .map(|v| {
                probs
                    .get(v)
                    .map(|p| (v, Quantifier::Random(p)))
                    .ok_or_else(|| Error::validation(format!("no probability for variable {v}")))
            })
            .collect()
    }

    /// `ℝX ∃A ∃aux. φ ∧ (A = group) [∧ implications]` with `probs` for X.
    pub fn enumeration_formula(
        &self,
        group: &CompoundGroup,
        probs: &ProbabilityTable,
        options: &VerifyOptions,
    ) -> Result<SsatFormula> {
        let mut prefix = self.random_prefix(probs)?;
        prefix.extend(self.map.protected_vars().into_iter().map(|v| (v, Quantifier::Exists)));
        prefix.extend(self.model.positive.aux.iter().map(|&v| (v, Quantifier::Exists)));
        let mut clauses = self.model.positive.cnf.clauses().to_vec();
        clauses.extend(group_to_unit_clauses(group));
        clauses.extend(self.support(options));
        SsatFormula::new(prefix, CnfFormula::new(self.num_vars(), clauses)?)
    }

    /// `∃A ℝX ∃aux. φ ∧ valid(A) [∧ implications]` with `probs` for X.
    pub fn learning_formula(&self, probs: &ProbabilityTable, options: &VerifyOptions) -> Result<SsatFormula> {
        let mut prefix: Vec<_> = self
            .map
            .protected_vars()
            .into_iter()
            .map(|v| (v, Quantifier::Exists))
            .collect();
        prefix.extend(self.random_prefix(probs)?);
        prefix.extend(self.model.positive.aux.iter().map(|&v| (v, Quantifier::Exists)));
        let mut clauses = self.model.positive.cnf.clauses().to_vec();
        clauses.extend(self.map.protected_domain());
        clauses.extend(self.support(options));
        SsatFormula::new(prefix, CnfFormula::new(self.num_vars(), clauses)?)
    }

    /// `∀A ℝX. φ` restricted to valid groups, for the least favored group.
    pub fn universal_formula(&self, probs: &ProbabilityTable, options: &VerifyOptions) -> Result<UrFormula> {
        let random = self
            .random_prefix(probs)?
            .into_iter()
            .map(|(v, q)| match q {
                Quantifier::Random(p) => (v, p),
                Quantifier::Exists => unreachable!("random prefix"),
            })
            .collect();
        let mut f = UrFormula::new(self.map.protected_vars(), random, self.model.positive.cnf.clone())
            .with_domain(self.map.protected_domain())
            .with_support(self.support(options));
        if let Some(neg) = &self.model.negative {
            f = f.with_negation(Negation {
                cnf: neg.cnf.clone(),
                aux: neg.aux.clone(),
            });
        }
        Ok(f)
    }
}

/// Extremes and per-group values of one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    /// Every solved group (enumeration only).
    pub groups: Vec<PpvRecord>,
    pub favored: PpvRecord,
    pub unfavored: PpvRecord,
    /// Groups without rows in their conditioning context.
    pub skipped: Vec<String>,
    pub stats: Stats,
}

impl Run {
    pub fn gap(&self) -> f64 {
        self.favored.ppv - self.unfavored.ppv
    }
}

/// Probabilities for enumeration: estimated inside each group, or over all
/// rows (what learning uses).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conditioning {
    PerGroup,
    Unconditioned,
}

fn context(group: Option<&CompoundGroup>, label: Option<bool>) -> Context {
    match (group, label) {
        (None, None) => Context::All,
        (None, Some(y)) => Context::Label(y),
        (Some(g), None) => Context::Group(g.clone()),
        (Some(g), Some(y)) => Context::GroupLabel(g.clone(), y),
    }
}

/// Solves one formula per compound group. `label` restricts the
/// probability estimates to rows with that true label (for TPR and FPR).
/// Groups with no rows in their context are skipped; if all are, it fails.
pub fn verify_by_enumeration(
    problem: &Problem,
    label: Option<bool>,
    conditioning: Conditioning,
    options: &VerifyOptions,
) -> Result<Run> {
    let groups = enumerate_groups(&problem.map);
    let shared = match conditioning {
        Conditioning::Unconditioned => Some(estimate_probs(&problem.data, &problem.map, context(None, label))?),
        Conditioning::PerGroup => None,
    };
    let solved = crate::par::map(&groups, options.parallel, |g| -> Result<Option<(PpvRecord, Stats)>> {
        let probs = match &shared {
            Some(p) => p.clone(),
            None => match estimate_probs(&problem.data, &problem.map, context(Some(g), label)) {
                Ok(p) => p,
                Err(Error::EmptyGroup(_)) => return Ok(None),
                Err(e) => return Err(e),
            },
        };
        let formula = problem.enumeration_formula(g, &probs, options)?;
        let r = evaluate(&formula).map_err(|e| Error::Contract(format!("group {g}: {e}")))?;
        let record = PpvRecord {
            group: g.clone(),
            ppv: r.probability,
            conditioning: probs.context().to_string(),
            rows: Some(probs.rows()),
        };
        Ok(Some((record, Stats::from_solver(1, &r.stats))))
    });
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut stats = Stats::default();
    for (g, s) in groups.iter().zip(solved) {
        match s? {
            Some((rec, st)) => {
                records.push(rec);
                stats.add(&st);
            }
            None => {
                log::warn!("no rows for {}; group skipped", context(Some(g), label));
                skipped.push(context(Some(g), label).to_string());
            }
        }
    }
    // First group wins ties, so the choice does not depend on scheduling.
    let favored = records
        .iter()
        .fold(None::<&PpvRecord>, |best, r| match best {
            Some(b) if b.ppv >= r.ppv => Some(b),
            _ => Some(r),
        })
        .ok_or_else(|| Error::EmptyGroup(format!("every compound group ({} skipped)", skipped.len())))?
        .clone();
    let unfavored = records
        .iter()
        .fold(None::<&PpvRecord>, |best, r| match best {
            Some(b) if b.ppv <= r.ppv => Some(b),
            _ => Some(r),
        })
        .expect("nonempty")
        .clone();
    Ok(Run {
        groups: records,
        favored,
        unfavored,
        skipped,
        stats,
    })
}

/// Most favored group from the existential-random formula, least favored
/// from the universal-random dual, both over unconditioned probabilities
/// (restricted to rows with `label` when given).
pub fn verify_by_learning(problem: &Problem, label: Option<bool>, options: &VerifyOptions) -> Result<Run> {
    let probs = estimate_probs(&problem.data, &problem.map, context(None, label))?;
    let groups = enumerate_groups(&problem.map);
    // A zero-probability result carries an all-FALSE witness, which need
    // not be a valid group; every group attains the extreme then.
    let witness_group = |w: &crate::ssat::Assignment| group_of(&problem.map, w).unwrap_or_else(|| groups[0].clone());
    let record = |group: CompoundGroup, ppv: f64| PpvRecord {
        group,
        ppv,
        conditioning: probs.context().to_string(),
        rows: None,
    };

    let max = evaluate(&problem.learning_formula(&probs, options)?)?;
    let mut min = solve_ur(&problem.universal_formula(&probs, options)?)?;
    // the minimum comes out of a subtraction and can overshoot by rounding
    if min.probability > max.probability && min.probability - max.probability <= ROUNDING_SLACK {
        min.probability = max.probability;
    }
    let mut stats = Stats::from_solver(1, &max.stats);
    stats.add(&Stats::from_solver(1, &min.stats));
    Ok(Run {
        groups: Vec::new(),
        favored: record(witness_group(&max.witness), max.probability),
        unfavored: record(witness_group(&min.witness), min.probability),
        skipped: Vec::new(),
        stats,
    })
}

fn run_pipeline(problem: &Problem, mode: Mode, label: Option<bool>, options: &VerifyOptions) -> Result<Run> {
    match mode {
        Mode::Enum => verify_by_enumeration(problem, label, Conditioning::PerGroup, options),
        Mode::Learn => verify_by_learning(problem, label, options),
        Mode::Both => unreachable!("split by caller"),
    }
}

fn pipeline_report(problem: &Problem, mode: Mode, options: &VerifyOptions) -> Result<PipelineReport> {
    let start = Instant::now();
    let mut warnings = Vec::new();
    let base = run_pipeline(problem, mode, None, options)?;
    let mut stats = base.stats.clone();
    let mut skipped = base.skipped.clone();
    for s in &base.skipped {
        warnings.push(format!("skipped empty group: {s}"));
    }
    let (lo, hi) = (base.unfavored.ppv, base.favored.ppv);
    let mut metrics = MetricValues::default();
    if options.metrics.di {
        metrics.di = Some(disparate_impact(lo, hi)?);
        if hi == 0.0 {
            warnings.push("no group has positive predictions; disparate impact reported as 1".into());
        }
    }
    if options.metrics.sp {
        metrics.sp = Some(statistical_parity(lo, hi)?);
    }
    if options.metrics.eo {
        let present = |y: bool| (0..problem.data.len()).any(|i| problem.data.label(i) == y);
        for y in [true, false] {
            if !present(y) {
                return Err(Error::validation(format!(
                    "equalized odds needs both label classes; no row has label {}",
                    u8::from(y)
                )));
            }
        }
        let tpr = run_pipeline(problem, mode, Some(true), options)?;
        let fpr = run_pipeline(problem, mode, Some(false), options)?;
        for run in [&tpr, &fpr] {
            stats.add(&run.stats);
            for s in &run.skipped {
                warnings.push(format!("skipped empty group: {s}"));
            }
            skipped.extend(run.skipped.iter().cloned());
        }
        metrics.eo = Some(EqualizedOdds {
            tpr_gap: tpr.gap(),
            fpr_gap: fpr.gap(),
            eo: equalized_odds(tpr.gap(), fpr.gap()),
        });
    }
    if options.timings {
        stats.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    let guideline = Guideline::new(problem, options);
    Ok(PipelineReport {
        probabilities: match mode {
            Mode::Enum => "conditioned on each group",
            _ => "unconditioned",
        }
        .to_string(),
        groups: base.groups,
        favored: base.favored,
        unfavored: base.unfavored,
        metrics,
        skipped,
        warnings,
        guideline,
        stats,
    })
}

/// Runs the selected pipeline(s). In [`Mode::Both`] the report carries a
/// [`CrossCheck`]; callers decide what to do when it fails.
pub fn verify(problem: &Problem, mode: Mode, options: &VerifyOptions) -> Result<FairnessReport> {
    match mode {
        Mode::Enum | Mode::Learn => Ok(FairnessReport {
            mode,
            single: Some(pipeline_report(problem, mode, options)?),
            enumeration: None,
            learning: None,
            cross_check: None,
        }),
        Mode::Both => {
            let enumeration = pipeline_report(problem, Mode::Enum, options)?;
            let learning = pipeline_report(problem, Mode::Learn, options)?;
            let check = cross_check(problem, options)?;
            Ok(FairnessReport {
                mode,
                single: None,
                enumeration: Some(enumeration),
                learning: Some(learning),
                cross_check: Some(check),
            })
        }
    }
}

/// Learning extremes against enumeration over unconditioned probabilities.
pub fn cross_check(problem: &Problem, options: &VerifyOptions) -> Result<CrossCheck> {
    let learned = verify_by_learning(problem, None, options)?;
    let enumerated = verify_by_enumeration(problem, None, Conditioning::Unconditioned, options)?;
    let max_diff = (learned.favored.ppv - enumerated.favored.ppv).abs();
    let min_diff = (learned.unfavored.ppv - enumerated.unfavored.ppv).abs();
    Ok(CrossCheck {
        tolerance: CROSS_CHECK_TOLERANCE,
        enum_max: enumerated.favored.ppv,
        enum_min: enumerated.unfavored.ppv,
        learn_max: learned.favored.ppv,
        learn_min: learned.unfavored.ppv,
        agree: max_diff <= CROSS_CHECK_TOLERANCE && min_diff <= CROSS_CHECK_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{fitness_income_data, fitness_income_schema, fitness_income_tree};

    fn fitness_income(rows: usize, spec: &ModelSpec) -> Problem {
        let table = fitness_income_data(rows, 7);
        Problem::from_sources(&fitness_income_schema(), &table, spec, None, EncodeOptions::default()).unwrap()
    }

    fn sequential() -> VerifyOptions {
        VerifyOptions {
            parallel: false,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn metric_set_parsing() {
        let m: MetricSet = "di, EO".parse().unwrap();
        assert_eq!(
            m,
            MetricSet {
                di: true,
                sp: false,
                eo: true
            }
        );
        assert!("di,xx".parse::<MetricSet>().is_err());
        assert!("".parse::<MetricSet>().is_err());
    }

    #[test]
    fn fitness_income_enumeration() {
        let p = fitness_income(4000, &fitness_income_tree());
        let run = verify_by_enumeration(&p, None, Conditioning::PerGroup, &sequential()).unwrap();
        assert_eq!(run.groups.len(), 2);
        assert_eq!(run.favored.group.to_string(), "age=young");
        assert_eq!(run.unfavored.group.to_string(), "age=old");
        assert!(run.unfavored.ppv < 0.3 && run.favored.ppv > 0.6, "{run:?}");
        assert_eq!(run.stats.solves, 2);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let p = fitness_income(1000, &fitness_income_tree());
        let a = verify(&p, Mode::Enum, &sequential()).unwrap();
        let b = verify(&p, Mode::Enum, &VerifyOptions::default()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn learning_agrees_with_unconditioned_enumeration() {
        let p = fitness_income(1000, &fitness_income_tree());
        let check = cross_check(&p, &sequential()).unwrap();
        assert!(check.agree, "{check:?}");
        let report = verify(&p, Mode::Both, &sequential()).unwrap();
        assert!(report.cross_check.unwrap().agree);
        assert!(report.enumeration.is_some() && report.learning.is_some());
    }

    #[test]
    fn constant_classifiers() {
        for (doc, ppv) in [
            (r#"{"type": "cnf", "clauses": []}"#, 1.0),
            (r#"{"type": "cnf", "clauses": [[]]}"#, 0.0),
            (r#"{"type": "tree", "root": {"label": 0}}"#, 0.0),
        ] {
            let p = fitness_income(300, &ModelSpec::from_json(doc).unwrap());
            for mode in [Mode::Enum, Mode::Learn] {
                let r = verify(&p, mode, &sequential()).unwrap();
                let r = r.primary();
                assert_eq!(r.favored.ppv, ppv);
                assert_eq!(r.unfavored.ppv, ppv);
                assert_eq!(r.metrics.di, Some(1.0));
                assert_eq!(r.metrics.sp, Some(0.0));
                assert_eq!(r.metrics.eo.unwrap().eo, 0.0);
                assert_eq!(r.warnings.len(), usize::from(ppv == 0.0));
            }
        }
    }

    #[test]
    fn empty_groups_are_skipped() {
        let table = RawTable::from_reader("fitness,income,age,label\n0.7,0.5,young,1\n0.2,0.9,young,0\n".as_bytes()).unwrap();
        let p = Problem::from_sources(
            &fitness_income_schema(),
            &table,
            &fitness_income_tree(),
            None,
            EncodeOptions::default(),
        )
        .unwrap();
        let opts = VerifyOptions {
            metrics: "di,sp".parse().unwrap(),
            ..sequential()
        };
        let r = verify(&p, Mode::Enum, &opts).unwrap();
        let r = r.primary();
        assert_eq!(r.skipped, ["age=old"]);
        assert_eq!(r.favored, r.unfavored);
        assert_eq!(r.groups.len(), 1);
    }

    #[test]
    fn eo_requires_both_labels() {
        let table = RawTable::from_reader("fitness,income,age,label\n0.7,0.5,young,1\n0.2,0.9,old,1\n".as_bytes()).unwrap();
        let p = Problem::from_sources(
            &fitness_income_schema(),
            &table,
            &fitness_income_tree(),
            None,
            EncodeOptions::default(),
        )
        .unwrap();
        assert!(matches!(verify(&p, Mode::Enum, &sequential()), Err(Error::Validation(_))));
    }

    #[test]
    fn report_json_shape() {
        let p = fitness_income(500, &fitness_income_tree());
        let json: serde_json::Value = serde_json::from_str(&verify(&p, Mode::Enum, &sequential()).unwrap().to_json()).unwrap();
        assert_eq!(json["mode"], "enum");
        assert_eq!(json["groups"][0]["group"]["age"], "old");
        assert!(json["metrics"]["eo"]["tpr_gap"].is_number());
        assert!(json["stats"].get("wall_ms").is_none());
        assert_eq!(json["guideline"]["rows"], 500);
    }
}
