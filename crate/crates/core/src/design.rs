//! Overall relative information across many variables and budget-constrained
//! follow-up allocation.
//!
//! The overall inverse relative information is the observed-lod weighted mean
//! of the per-variable inverse relative informations. Each per-variable term
//! is affine in the number of resolved values `n1`, so the allocation problem
//! is a bounded integer knapsack with an optional fixed charge per activated
//! variable.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::lod::lod_mle_vs_null;
use crate::rel_info::{plugin_summary, summary, RiForm, StudyConfig};
use crate::settings::Settings;

/// Exact mode enumerates active subsets implicitly up to this many variables.
pub const EXACT_SUBSET_LIMIT: usize = 20;

/// Branch-and-bound node budget before exact mode gives up and reports the
/// incumbent with `optimal = false`.
pub const NODE_LIMIT: u64 = 50_000_000;

/// Upper bound on the number of allocations `brute_force_allocation` visits.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

const COST_SLACK: f64 = 1e-9;

/// One studied variable and what it costs to resolve its missing values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableRecord {
    pub id: String,
    pub cfg: StudyConfig,
    /// Cost per resolved missing value.
    pub unit_cost: f64,
    /// Fixed charge paid once if any value of this variable is resolved.
    pub setup_cost: f64,
    pub max_resolvable: u64,
}

impl VariableRecord {
    /// Record with unit cost 1, no setup cost, and every missing value resolvable.
    pub fn new(id: impl Into<String>, cfg: StudyConfig) -> Self {
        Self {
            id: id.into(),
            max_resolvable: cfg.missing(),
            cfg,
            unit_cost: 1.0,
            setup_cost: 0.0,
        }
    }

    pub fn with_costs(mut self, unit_cost: f64, setup_cost: f64) -> Self {
        self.unit_cost = unit_cost;
        self.setup_cost = setup_cost;
        self
    }

    pub fn with_max_resolvable(mut self, max: u64) -> Self {
        self.max_resolvable = max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg
            .validate()
            .map_err(|e| Error::Invalid(format!("variable '{}': {e}", self.id)))?;
        if self.max_resolvable > self.cfg.missing() {
            return Err(Error::Invalid(format!(
                "variable '{}': max_resolvable {} exceeds {} missing values",
                self.id,
                self.max_resolvable,
                self.cfg.missing()
            )));
        }
        for (name, c) in [("unit_cost", self.unit_cost), ("setup_cost", self.setup_cost)] {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::Invalid(format!(
                    "variable '{}': {name} = {c} must be finite and nonnegative",
                    self.id
                )));
            }
        }
        Ok(())
    }

    /// Cost of resolving `n1` values.
    pub fn cost(&self, n1: u64) -> f64 {
        if n1 == 0 {
            0.0
        } else {
            self.setup_cost + self.unit_cost * n1 as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Greedy,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "greedy" => Ok(Mode::Greedy),
            other => Err(Error::Invalid(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignProblem {
    pub variables: Vec<VariableRecord>,
    pub budget: f64,
    pub mode: Mode,
    pub form: RiForm,
    pub settings: Settings,
}

impl DesignProblem {
    pub fn new(variables: Vec<VariableRecord>, budget: f64, mode: Mode) -> Self {
        Self {
            variables,
            budget,
            mode,
            form: RiForm::PlugIn,
            settings: Settings::default(),
        }
    }

    pub fn with_form(mut self, form: RiForm) -> Self {
        self.form = form;
        self
    }

    pub fn with_settings(mut self, settings: Settings) -> Self {
        self.settings = settings;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.variables.is_empty() {
            return Err(Error::Invalid("design problem has no variables".into()));
        }
        if !self.budget.is_finite() || self.budget < 0.0 {
            return Err(Error::Invalid(format!(
                "budget {} must be finite and nonnegative",
                self.budget
            )));
        }
        let mut seen = BTreeSet::new();
        for v in &self.variables {
            v.validate()?;
            if !seen.insert(v.id.as_str()) {
                return Err(Error::Invalid(format!("duplicate variable id '{}'", v.id)));
            }
        }
        Ok(())
    }
}

/// A variable left out of the objective, and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedVariable {
    pub id: String,
    pub reason: String,
}

/// Per-variable variability column of a design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableReport {
    pub id: String,
    pub n1: u64,
    /// Observed MLE-vs-null lod, in the configured base.
    pub lod_ob: f64,
    pub expected_inverse_ri: f64,
    pub sd_inverse_ri: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSolution {
    pub allocations: BTreeMap<String, u64>,
    /// Overall inverse relative information of the allocation.
    pub objective: f64,
    pub budget_used: f64,
    pub optimal: bool,
    pub excluded: Vec<ExcludedVariable>,
    pub report: Vec<VariableReport>,
}

/// Observed-lod weighted mean of inverse relative informations.
pub fn combine_weighted(lods: &[f64], inverse_ris: &[f64]) -> f64 {
    let total = lods.iter().fold(0.0, |a, b| a + b);
    let weighted: f64 = lods.iter().zip(inverse_ris).map(|(l, r)| l * r).sum();
    weighted / total
}

/// Overall inverse relative information of `allocations` across `variables`.
/// Variables absent from `allocations` count as unallocated.
pub fn combine_overall_inverse_ri(
    variables: &[VariableRecord],
    allocations: &BTreeMap<String, u64>,
    form: RiForm,
    settings: &Settings,
) -> Result<f64> {
    for id in allocations.keys() {
        if !variables.iter().any(|v| &v.id == id) {
            return Err(Error::Invalid(format!("allocation for unknown variable '{id}'")));
        }
    }
    let mut lods = Vec::with_capacity(variables.len());
    let mut ris = Vec::with_capacity(variables.len());
    let mut unstable = Vec::new();
    let mut worst = f64::INFINITY;
    for v in variables {
        let n1 = allocations.get(&v.id).copied().unwrap_or(0);
        if n1 > v.max_resolvable {
            return Err(Error::Invalid(format!(
                "allocation {n1} for '{}' exceeds max_resolvable {}",
                v.id, v.max_resolvable
            )));
        }
        let lod = lod_mle_vs_null(v.cfg.observed(), v.cfg.p0)?.value;
        let ri = match summary(&v.cfg, form, n1, settings) {
            Ok(s) if s.stable => Some(s.expected_inverse_ri),
            Ok(_) | Err(Error::Instability { .. }) => None,
            Err(e) => return Err(e),
        };
        match ri {
            Some(ri) if lod >= settings.eps_lod => {
                lods.push(lod);
                ris.push(ri);
            }
            _ => {
                unstable.push(v.id.clone());
                worst = worst.min(lod);
            }
        }
    }
    if !unstable.is_empty() {
        return Err(Error::Instability {
            ids: unstable,
            lod_ob: worst,
            eps: settings.eps_lod,
        });
    }
    let total = lods.iter().fold(0.0, |a, b| a + b);
    if !(total >= settings.eps_lod) {
        return Err(Error::EmptyWeight {
            total,
            eps: settings.eps_lod,
        });
    }
    Ok(combine_weighted(&lods, &ris))
}

/// A stable variable reduced to what the knapsack needs.
#[derive(Debug, Clone)]
struct Item {
    /// Index into the stable variable list.
    var: usize,
    /// Objective gain per resolved value.
    value: f64,
    unit_cost: f64,
    setup_cost: f64,
    upper: u64,
}

impl Item {
    fn cost(&self, n: u64) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.setup_cost + self.unit_cost * n as f64
        }
    }

    /// Per-unit cost with the setup charge spread over a full fill.
    fn amortized_cost(&self) -> f64 {
        self.unit_cost + self.setup_cost / self.upper as f64
    }

    fn is_free(&self) -> bool {
        self.unit_cost == 0.0 && self.setup_cost == 0.0
    }

    /// Largest count affordable with `remaining` budget.
    fn max_affordable(&self, remaining: f64) -> u64 {
        let room = remaining + COST_SLACK - self.setup_cost;
        if room < 0.0 {
            return 0;
        }
        if self.unit_cost == 0.0 {
            return self.upper;
        }
        let mut k = ((room / self.unit_cost).floor() as u64).min(self.upper);
        while k > 0 && self.cost(k) > remaining + COST_SLACK {
            k -= 1;
        }
        k
    }
}

struct Prepared {
    stable: Vec<VariableRecord>,
    excluded: Vec<ExcludedVariable>,
    /// Inverse RI slope per resolved value, stable variables only.
    items: Vec<Item>,
}

fn prepare(problem: &DesignProblem) -> Result<Prepared> {
    problem.validate()?;
    let settings = &problem.settings;
    let mut sorted: Vec<&VariableRecord> = problem.variables.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));

    let mut stable = Vec::new();
    let mut excluded = Vec::new();
    let mut lods = Vec::new();
    let mut slopes = Vec::new();
    for v in sorted {
        let lod = lod_mle_vs_null(v.cfg.observed(), v.cfg.p0)?.value;
        if lod < settings.eps_lod {
            excluded.push(ExcludedVariable {
                id: v.id.clone(),
                reason: format!("observed lod {lod:e} below {:e}", settings.eps_lod),
            });
            continue;
        }
        let probe = v.cfg.missing().min(1);
        let slope = match summary(&v.cfg, problem.form, probe, settings) {
            Ok(s) if s.stable => s.expected_inverse_ri - 1.0,
            Ok(s) => {
                excluded.push(ExcludedVariable {
                    id: v.id.clone(),
                    reason: format!("observed lod {:e} is not positive", s.lod_ob.natural_value()),
                });
                continue;
            }
            Err(e @ (Error::Instability { .. } | Error::BoundaryMle { .. })) => {
                excluded.push(ExcludedVariable {
                    id: v.id.clone(),
                    reason: e.to_string(),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        lods.push(lod);
        slopes.push(slope);
        stable.push(v.clone());
    }
    let total = lods.iter().fold(0.0, |a, b| a + b);
    if stable.is_empty() || total < settings.eps_lod {
        return Err(Error::EmptyWeight {
            total,
            eps: settings.eps_lod,
        });
    }
    let items = stable
        .iter()
        .enumerate()
        .map(|(i, v)| Item {
            var: i,
            value: lods[i] * slopes[i] / total,
            unit_cost: v.unit_cost,
            setup_cost: v.setup_cost,
            upper: v.max_resolvable,
        })
        .filter(|it| it.upper > 0 && it.value > 0.0)
        .collect();
    Ok(Prepared {
        stable,
        excluded,
        items,
    })
}

/// Chooses how many missing values to resolve at each variable so that the
/// overall inverse relative information is maximal within the budget.
///
/// Unstable variables are dropped from the objective, listed in
/// `excluded`, and always receive zero.
pub fn optimize_allocation(problem: &DesignProblem) -> Result<DesignSolution> {
    let prepared = prepare(problem)?;
    let budget = problem.budget;

    // Free items are filled before any budget accounting.
    let mut base = vec![0u64; prepared.stable.len()];
    let mut items = Vec::new();
    for it in &prepared.items {
        if it.is_free() {
            base[it.var] = it.upper;
        } else {
            items.push(it.clone());
        }
    }
    // Amortized value-per-cost order; the stable list is already sorted by id,
    // so a stable sort keeps ties in id order.
    items.sort_by(|a, b| {
        let ra = a.value / a.amortized_cost();
        let rb = b.value / b.amortized_cost();
        rb.partial_cmp(&ra).expect("finite ratios")
    });

    let greedy = greedy_fill(&items, budget);
    let (counts, optimal) = match problem.mode {
        Mode::Greedy => (greedy, false),
        Mode::Exact if prepared.stable.len() > EXACT_SUBSET_LIMIT => (greedy, false),
        Mode::Exact => {
            let mut search = BranchAndBound::new(&items, budget, greedy);
            let complete = search.run();
            (search.best, complete)
        }
    };
    for (it, n) in items.iter().zip(counts) {
        base[it.var] = n;
    }
    finish(problem, prepared, base, optimal)
}

fn greedy_fill(items: &[Item], budget: f64) -> Vec<u64> {
    let mut remaining = budget;
    items
        .iter()
        .map(|it| {
            let k = it.max_affordable(remaining);
            remaining -= it.cost(k);
            k
        })
        .collect()
}

struct BranchAndBound<'a> {
    items: &'a [Item],
    budget: f64,
    best: Vec<u64>,
    best_value: f64,
    current: Vec<u64>,
    nodes: u64,
}

impl<'a> BranchAndBound<'a> {
    fn new(items: &'a [Item], budget: f64, incumbent: Vec<u64>) -> Self {
        let best_value = value_of(items, &incumbent);
        Self {
            items,
            budget,
            best: incumbent,
            best_value,
            current: vec![0; items.len()],
            nodes: 0,
        }
    }

    /// Returns false if the node limit cut the search short.
    fn run(&mut self) -> bool {
        self.descend(0, 0.0, 0.0)
    }

    /// LP relaxation of the fixed-charge problem over `items[from..]`: each
    /// item may be taken fractionally at its amortized unit cost. Items are
    /// already in decreasing amortized ratio order.
    fn bound(&self, from: usize, remaining: f64) -> f64 {
        let mut room = remaining.max(0.0) + COST_SLACK;
        let mut total = 0.0;
        for it in &self.items[from..] {
            let full = it.amortized_cost() * it.upper as f64;
            if full <= room {
                total += it.value * it.upper as f64;
                room -= full;
            } else {
                total += it.value * room / it.amortized_cost();
                break;
            }
        }
        total
    }

    fn descend(&mut self, idx: usize, spent: f64, value: f64) -> bool {
        self.nodes += 1;
        if self.nodes > NODE_LIMIT {
            return false;
        }
        if idx == self.items.len() {
            if value > self.best_value {
                self.best_value = value;
                self.best.copy_from_slice(&self.current);
            }
            return true;
        }
        let it = &self.items[idx];
        let remaining = self.budget - spent;
        let top = it.max_affordable(remaining);
        for n in (0..=top).rev() {
            let cost = it.cost(n);
            let gained = value + it.value * n as f64;
            let slack = 1e-12 * gained.abs().max(1.0);
            if gained + self.bound(idx + 1, remaining - cost) + slack <= self.best_value {
                continue;
            }
            self.current[idx] = n;
            if !self.descend(idx + 1, spent + cost, gained) {
                return false;
            }
        }
        self.current[idx] = 0;
        true
    }
}

fn value_of(items: &[Item], counts: &[u64]) -> f64 {
    items.iter().zip(counts).map(|(it, &n)| it.value * n as f64).sum()
}

fn finish(
    problem: &DesignProblem,
    prepared: Prepared,
    counts: Vec<u64>,
    optimal: bool,
) -> Result<DesignSolution> {
    let settings = &problem.settings;
    let stable_alloc: BTreeMap<String, u64> = prepared
        .stable
        .iter()
        .zip(&counts)
        .map(|(v, &n)| (v.id.clone(), n))
        .collect();
    let objective = combine_overall_inverse_ri(&prepared.stable, &stable_alloc, problem.form, settings)?;

    let mut report = Vec::with_capacity(prepared.stable.len());
    let mut budget_used = 0.0;
    for (v, &n1) in prepared.stable.iter().zip(&counts) {
        let s = summary(&v.cfg, problem.form, n1, settings)?;
        let lod = lod_mle_vs_null(v.cfg.observed(), v.cfg.p0)?;
        let cost = v.cost(n1);
        budget_used += cost;
        report.push(VariableReport {
            id: v.id.clone(),
            n1,
            lod_ob: lod.in_base(settings.log_base).value,
            expected_inverse_ri: s.expected_inverse_ri,
            sd_inverse_ri: s.sd_inverse_ri,
            cost,
        });
    }
    let mut allocations = stable_alloc;
    for ex in &prepared.excluded {
        allocations.insert(ex.id.clone(), 0);
    }
    Ok(DesignSolution {
        allocations,
        objective,
        budget_used,
        optimal,
        excluded: prepared.excluded,
        report,
    })
}

/// Exhaustive search over every feasible integer allocation. Ties go to the
/// lexicographically smallest allocation vector in id order.
pub fn brute_force_allocation(problem: &DesignProblem) -> Result<DesignSolution> {
    let prepared = prepare(problem)?;
    let settings = &problem.settings;
    let vars = &prepared.stable;

    let size = vars
        .iter()
        .map(|v| v.max_resolvable as u128 + 1)
        .try_fold(1u128, |acc, k| acc.checked_mul(k))
        .unwrap_or(u128::MAX);
    if size > BRUTE_FORCE_LIMIT {
        return Err(Error::Size {
            size,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    // Tabulate each variable's inverse RI at every count, straight from the
    // closed form rather than from the knapsack slopes.
    let lods: Vec<f64> = vars
        .iter()
        .map(|v| lod_mle_vs_null(v.cfg.observed(), v.cfg.p0).map(|l| l.value))
        .collect::<Result<_>>()?;
    let tables: Vec<Vec<f64>> = vars
        .iter()
        .map(|v| {
            (0..=v.max_resolvable)
                .map(|n1| summary(&v.cfg, problem.form, n1, settings).map(|s| s.expected_inverse_ri))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut current = vec![0u64; vars.len()];
    let mut best: Option<(f64, Vec<u64>)> = None;
    let mut ris = vec![0.0; vars.len()];
    loop {
        let cost: f64 = vars.iter().zip(&current).map(|(v, &n)| v.cost(n)).sum();
        if cost <= problem.budget + COST_SLACK {
            for (i, &n) in current.iter().enumerate() {
                ris[i] = tables[i][n as usize];
            }
            let value = combine_weighted(&lods, &ris);
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, current.clone()));
            }
        }
        // Odometer: last id varies fastest, so allocations come in
        // lexicographic order.
        let mut pos = vars.len();
        loop {
            if pos == 0 {
                let (_, counts) = best.expect("the all-zero allocation is always feasible");
                return finish(problem, prepared, counts, true);
            }
            pos -= 1;
            if current[pos] < vars[pos].max_resolvable {
                current[pos] += 1;
                break;
            }
            current[pos] = 0;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preferred {
    ResolveMissing,
    NewIndividuals,
    Equal,
}

/// Resolving missing values versus enrolling new individuals, on the common
/// inverse-information scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub id: String,
    pub n1_resolve: u64,
    pub n_new: u64,
    /// Plug-in inverse relative information from resolving `n1_resolve` values.
    pub resolve_factor: f64,
    /// `(n + n_new) / n`, the gain from `n_new` new individuals at the same
    /// missing rate.
    pub new_individuals_factor: f64,
    /// Number of new individuals matching the resolve factor.
    pub break_even_n_new: f64,
    pub preferred: Preferred,
}

pub fn compare_markers_vs_individuals(
    record: &VariableRecord,
    n1_resolve: u64,
    n_new: u64,
    settings: &Settings,
) -> Result<ComparisonReport> {
    record.validate()?;
    let n = record.cfg.n as f64;
    let resolve = plugin_summary(&record.cfg, n1_resolve, settings)?.expected_inverse_ri;
    let fresh = (n + n_new as f64) / n;
    let preferred = if (resolve - fresh).abs() <= 1e-12 * resolve.max(fresh) {
        Preferred::Equal
    } else if resolve > fresh {
        Preferred::ResolveMissing
    } else {
        Preferred::NewIndividuals
    };
    Ok(ComparisonReport {
        id: record.id.clone(),
        n1_resolve,
        n_new,
        resolve_factor: resolve,
        new_individuals_factor: fresh,
        break_even_n_new: n * (resolve - 1.0),
        preferred,
    })
}
