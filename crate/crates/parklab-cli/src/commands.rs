//! Subcommand implementations: each builds a [`Table`] from the library's
//! results and runs its self-checks (normalization, bound sandwiches) so the
//! process can exit nonzero when an internal consistency test fails.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use parklab_core::asymptotics::{cf_report, ld_report, mean_expansion_report, ExpansionReport};
use parklab_core::closed_forms;
use parklab_core::monte_carlo;
use parklab_core::tv;
use parklab_core::{cars_for_ratio, Error, ModelParams, RngSpec};

use crate::output::{Cell, Table};
use crate::CliError;

/// Self-check failure: computations finished but an internal invariant
/// (normalization, bound sandwich) did not hold.
fn self_check(msg: String) -> CliError {
    CliError::self_check(msg)
}

pub fn simulate(params: &ModelParams, samples: u64, spec: RngSpec) -> Result<Table, CliError> {
    let hist = monte_carlo::estimate_last_car_histogram(params, samples, spec)?;
    let estimate = hist.pf_estimate()?;
    let q = closed_forms::q_vector(params)?;
    let normalized = hist.normalized();
    if let Some(emp) = &normalized {
        let mass: f64 = emp.probs().iter().sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(self_check(format!("histogram mass {mass} != 1")));
        }
    }

    let mut rows = Vec::with_capacity(params.n() as usize);
    for j in 1..=params.n() {
        let count = hist.counts[(j - 1) as usize];
        let freq = normalized.as_ref().map_or(0.0, |d| d.prob(j));
        let q_formula = q.prob(j);
        rows.push(vec![
            Cell::from(j),
            Cell::from(count),
            Cell::from(freq),
            Cell::from(q_formula),
            Cell::from((freq - q_formula).abs()),
        ]);
    }
    Ok(Table {
        command: "simulate",
        meta: vec![
            ("m", params.m().into()),
            ("n", params.n().into()),
            ("p", params.p().into()),
            ("samples", samples.into()),
            ("seed", spec.seed.into()),
            ("stream", spec.stream.into()),
            ("total_trials", hist.total_trials.into()),
            ("total_success", hist.total_success.into()),
            ("pf_estimate", estimate.value.into()),
            ("pf_std_error", estimate.std_error.into()),
        ],
        columns: vec!["j", "count", "freq", "q_formula", "abs_diff"],
        rows,
        inline_single_row: false,
    })
}

pub fn exact(m: u32, n: u32, p: &BigRational) -> Result<Table, CliError> {
    let pf = parklab_core::oracle::pf_probability(m, n, p)?;
    let q = parklab_core::oracle::q_distribution(m, n, p)?;
    let mean = parklab_core::oracle::mean_last_pref(m, n, p)?;

    // Self-check: the enumerated parking probability must equal the closed
    // form exactly, for any rational p.
    let formula = closed_forms::pf_probability_exact(m, n)?;
    if pf != formula {
        return Err(self_check(format!(
            "enumerated parking probability {pf} != closed form {formula}"
        )));
    }
    // Emit over the natural denominator n^m (numerator is integral by
    // p-invariance of the total successful mass).
    let space = BigInt::from(n).pow(m);
    let pf_num = (&pf * BigRational::from_integer(space.clone())).to_integer();
    let mean_exact = closed_forms::mean_last_pref_exact(m, n, p)?;
    if mean != mean_exact {
        return Err(self_check(format!(
            "enumerated mean {mean} != closed form {mean_exact}"
        )));
    }

    let rows = q
        .iter()
        .enumerate()
        .map(|(i, v)| vec![Cell::from(i as u64 + 1), Cell::from(v.to_string())])
        .collect();
    Ok(Table {
        command: "exact",
        meta: vec![
            ("m", m.into()),
            ("n", n.into()),
            ("p", p.to_string().into()),
            ("pf_probability", format!("{pf_num}/{space}").into()),
            ("mean", mean.to_string().into()),
        ],
        columns: vec!["j", "q_exact"],
        rows,
        inline_single_row: false,
    })
}

pub fn dist(params: &ModelParams) -> Result<Table, CliError> {
    let q = closed_forms::q_vector(params)?;
    let rows = (1..=params.n())
        .map(|j| vec![Cell::from(j), Cell::from(q.prob(j))])
        .collect();
    Ok(Table {
        command: "dist",
        meta: vec![
            ("m", params.m().into()),
            ("n", params.n().into()),
            ("p", params.p().into()),
        ],
        columns: vec!["j", "q"],
        rows,
        inline_single_row: false,
    })
}

pub fn mean(params: &ModelParams) -> Result<Table, CliError> {
    let value = closed_forms::mean_last_pref(params)?;
    Ok(Table {
        command: "mean",
        meta: vec![],
        columns: vec!["m", "n", "p", "mean"],
        rows: vec![vec![
            params.m().into(),
            params.n().into(),
            params.p().into(),
            value.into(),
        ]],
        inline_single_row: true,
    })
}

pub fn tv_cmd(params: &ModelParams, c: Option<f64>) -> Result<Table, CliError> {
    let report = tv::tv_report(params, c)?;
    if !report.sandwich_holds() {
        return Err(self_check(format!("bound sandwich violated: {report:?}")));
    }
    Ok(Table {
        command: "tv",
        meta: vec![],
        columns: vec![
            "m",
            "n",
            "p",
            "tv",
            "lower",
            "upper",
            "lower_half",
            "prop_c_cap",
        ],
        rows: vec![vec![
            report.m.into(),
            report.n.into(),
            report.p.into(),
            report.tv.into(),
            report.lower.into(),
            report.upper.into(),
            report.lower_half.into(),
            report.ratio_cap.into(),
        ]],
        inline_single_row: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionKind {
    Mean,
    Ld,
    Cf,
}

impl ExpansionKind {
    fn name(&self) -> &'static str {
        match self {
            ExpansionKind::Mean => "mean",
            ExpansionKind::Ld => "ld",
            ExpansionKind::Cf => "cf",
        }
    }
}

pub fn asymptotics_cmd(
    c: f64,
    p: f64,
    ns: &[u32],
    kind: ExpansionKind,
) -> Result<Table, CliError> {
    if ns.is_empty() {
        return Err(Error::Domain("empty n list".into()).into());
    }
    let reports: Vec<ExpansionReport> = ns
        .par_iter()
        .map(|&n| match kind {
            ExpansionKind::Mean => mean_expansion_report(n, c, p),
            ExpansionKind::Ld => ld_report(n, c),
            ExpansionKind::Cf => cf_report(n, c),
        })
        .collect::<Result<_, _>>()?;
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                Cell::from(r.n),
                Cell::from(r.m),
                Cell::from(r.approx),
                Cell::from(r.exact),
                Cell::from(r.abs_err),
                Cell::from(r.rel_err),
                Cell::from(r.scaled_err),
            ]
        })
        .collect();
    Ok(Table {
        command: "asymptotics",
        meta: vec![
            ("kind", String::from(kind.name()).into()),
            ("c", c.into()),
            ("p", p.into()),
        ],
        columns: vec![
            "n",
            "m",
            "approx",
            "exact",
            "abs_err",
            "rel_err",
            "scaled_err",
        ],
        rows,
        inline_single_row: false,
    })
}

pub struct SweepGrid {
    pub c_min: f64,
    pub c_max: f64,
    pub c_step: f64,
}

pub fn sweep_c(n: u32, p: f64, grid: &SweepGrid) -> Result<Table, CliError> {
    if grid.c_step.is_nan() || grid.c_step <= 0.0 || grid.c_max < grid.c_min {
        return Err(Error::Domain(format!(
            "bad sweep grid: min={} max={} step={}",
            grid.c_min, grid.c_max, grid.c_step
        ))
        .into());
    }
    let steps = ((grid.c_max - grid.c_min) / grid.c_step + 0.5).floor() as u32;
    let cs: Vec<f64> = (0..=steps)
        .map(|k| grid.c_min + k as f64 * grid.c_step)
        .filter(|&c| c < 1.0)
        .collect();

    // Rows are ordered by grid index regardless of worker completion order.
    let reports: Vec<tv::TvReport> = cs
        .par_iter()
        .map(|&c| {
            let m = cars_for_ratio(c, n)?;
            tv::tv_report(&ModelParams::new(m, n, p)?, Some(c))
        })
        .collect::<Result<_, _>>()?;

    for (c, report) in cs.iter().zip(&reports) {
        if !report.sandwich_holds() {
            return Err(self_check(format!(
                "bound violated at c={c}: {report:?}"
            )));
        }
    }
    let rows = cs
        .iter()
        .zip(&reports)
        .map(|(&c, r)| {
            vec![
                Cell::from(c),
                Cell::from(r.m),
                Cell::from(r.tv),
                Cell::from(r.upper),
                Cell::from(r.ratio_cap.expect("cap supplied")),
            ]
        })
        .collect();
    Ok(Table {
        command: "sweep-c",
        meta: vec![
            ("n", n.into()),
            ("p", p.into()),
            ("c_min", grid.c_min.into()),
            ("c_max", grid.c_max.into()),
            ("c_step", grid.c_step.into()),
        ],
        columns: vec!["c", "m", "tv", "upper_bound", "prop_c_cap"],
        rows,
        inline_single_row: false,
    })
}
