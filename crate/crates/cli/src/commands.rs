use rayon::prelude::*;

use divlab::acceptance::{determinism, run_suite_with_threads, CriterionOutcome, SUITE_IDS};
use divlab::constants::{c2_closed, SeriesConstants};
use divlab::divisor::{delta_at, hyperbola_d, DivisorTable};
use divlab::expsum::{eval_s, moment8_s};
use divlab::moment::{abs_moment_profile, moment_profile, window_moment, MomentResult, WindowSpec};
use divlab::relations::{min_gap, near_solution_count, RelationQuery, RelationSignature, SearchBudget};
use divlab::voronoi::{residual_mean_squares, VoronoiSeries};
use divlab::LabError;

use crate::args::*;
use crate::output::{opt_real, real, Run, Table};
use crate::CliError;

/// Result tables of a command: (file name, bytes, echo to stdout).
type Files = Vec<(String, Vec<u8>, bool)>;

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let name = cli.command.name();
    let params = parameters(cli);
    let mut run = Run::new(&cli.out, name, params);
    let (files, verdict) = match &cli.command {
        Command::Sieve(a) => (sieve(a)?, Ok(())),
        Command::Delta(a) => (delta(a)?, Ok(())),
        Command::Voronoi(a) => (voronoi(a)?, Ok(())),
        Command::Count(a) => (count(a)?, Ok(())),
        Command::Mingap(a) => (mingap(a)?, Ok(())),
        Command::Constants(a) => (constants(a)?, Ok(())),
        Command::Moment(a) => (moment(a)?, Ok(())),
        Command::Window(a) => (window(a)?, Ok(())),
        Command::Expsum(a) => (expsum(a)?, Ok(())),
        Command::Verify(a) => verify(a, cli.threads)?,
    };
    for (file, bytes, echo) in files {
        let path = run.write(&file, &bytes)?;
        if echo {
            print!("{}", String::from_utf8_lossy(&bytes));
        }
        eprintln!("wrote {}", path.display());
    }
    let manifest = run.finish(rayon::current_num_threads())?;
    eprintln!("wrote {}", manifest.display());
    verdict
}

fn parameters(cli: &Cli) -> serde_json::Value {
    let args = match &cli.command {
        Command::Sieve(a) => serde_json::to_value(a),
        Command::Delta(a) => serde_json::to_value(a),
        Command::Voronoi(a) => serde_json::to_value(a),
        Command::Count(a) => serde_json::to_value(a),
        Command::Mingap(a) => serde_json::to_value(a),
        Command::Constants(a) => serde_json::to_value(a),
        Command::Moment(a) => serde_json::to_value(a),
        Command::Window(a) => serde_json::to_value(a),
        Command::Expsum(a) => serde_json::to_value(a),
        Command::Verify(a) => serde_json::to_value(a),
    };
    serde_json::json!({ "threads": cli.threads, "arguments": args.expect("arguments serialize") })
}

fn sieve(a: &SieveArgs) -> Result<Files, CliError> {
    let table = DivisorTable::build(a.lo, a.hi)?;
    let mut running = if a.lo > 1 { hyperbola_d(a.lo - 1) } else { 0 };
    let mut t = Table::new(&["n", "d", "D"]);
    for n in a.lo..=a.hi {
        let d = table.d(n);
        running += d as u128;
        t.row([n.to_string(), d.to_string(), running.to_string()]);
    }
    Ok(vec![("sieve.csv".into(), t.into_bytes(), false)])
}

fn delta(a: &DeltaArgs) -> Result<Files, CliError> {
    let s = delta_at(a.x)?;
    println!("x={} D={} delta={}", a.x, s.summatory, real(s.delta));
    let mut t = Table::new(&["x", "D", "delta"]);
    t.row([real(s.x), s.summatory.to_string(), real(s.delta)]);
    Ok(vec![("delta.csv".into(), t.into_bytes(), false)])
}

fn voronoi(a: &VoronoiArgs) -> Result<Files, CliError> {
    let max = a.cutoffs.iter().copied().max().unwrap_or(0);
    let series = VoronoiSeries::new(max)?;
    let ms = residual_mean_squares(&series, a.x0, a.h, &a.cutoffs, a.samples)?;
    let mut t = Table::new(&["X", "H", "Y", "samples", "mean_square"]);
    for (y, m) in a.cutoffs.iter().zip(ms) {
        t.row([real(a.x0), real(a.h), y.to_string(), a.samples.to_string(), real(m)]);
    }
    Ok(vec![("voronoi.csv".into(), t.into_bytes(), true)])
}

fn budget(b: &BudgetArgs) -> SearchBudget {
    SearchBudget {
        max_side_entries: b.max_side_entries,
        max_enumeration: b.max_enumeration,
        max_certifications: b.max_certifications,
    }
}

fn signature(s: &[usize]) -> Result<RelationSignature, CliError> {
    if s.len() != 2 {
        return Err(CliError::Usage(format!("signature needs two counts p,q, got {s:?}")));
    }
    Ok(RelationSignature::new(s[0], s[1])?)
}

fn parse_range(text: &str) -> Result<(u64, u64), CliError> {
    let bad = || CliError::Usage(format!("range {text:?} must look like lo:hi"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

fn count(a: &CountArgs) -> Result<Files, CliError> {
    let sig = signature(&a.signature)?;
    let mut ranges = a.ranges.iter().map(|r| parse_range(r)).collect::<Result<Vec<_>, _>>()?;
    if ranges.len() == 1 {
        ranges = vec![ranges[0]; sig.arity()];
    }
    let query = RelationQuery::new(sig, ranges, a.delta)?.with_root(a.root)?;
    let r = near_solution_count(&query, &budget(&a.budget))?;
    let bounds: Vec<String> = query.ranges.iter().map(|(lo, hi)| format!("{lo}:{hi}")).collect();
    let mut t = Table::new(&["signature", "root", "ranges", "delta", "count", "exact_solutions", "min_nonzero_gap"]);
    t.row([
        sig.to_string(),
        a.root.to_string(),
        bounds.join(";"),
        real(a.delta),
        r.count.to_string(),
        r.exact_solutions.to_string(),
        opt_real(r.min_nonzero_gap),
    ]);
    Ok(vec![("count.csv".into(), t.into_bytes(), true)])
}

fn mingap(a: &MingapArgs) -> Result<Files, CliError> {
    let g = min_gap(signature(&a.signature)?, a.y, &budget(&a.budget))?;
    let witness: Vec<String> = g.witness.iter().map(u64::to_string).collect();
    let mut t = Table::new(&["signature", "Y", "gap", "radius", "exponent", "empirical_constant", "witness"]);
    t.row([
        g.signature.to_string(),
        g.y.to_string(),
        real(g.gap),
        real(g.radius),
        real(g.exponent),
        real(g.empirical_constant),
        witness.join(" "),
    ]);
    Ok(vec![("mingap.csv".into(), t.into_bytes(), true)])
}

fn constants(a: &ConstantsArgs) -> Result<Files, CliError> {
    let c = SeriesConstants::compute(a.low_cutoff, a.high_cutoff)?;
    let all = [c.c1, c.c2, c.c4, c.c7, c2_closed()];
    let mut bytes = serde_json::to_vec_pretty(&all).expect("estimates serialize");
    bytes.push(b'\n');
    Ok(vec![("constants.json".into(), bytes, true)])
}

const MOMENT_HEADER: [&str; 9] =
    ["kind", "exponent", "lo", "hi", "integral", "main_term", "relative_deviation", "constants_cutoff", "warning"];

fn moment_row(t: &mut Table, kind: &str, r: &MomentResult) {
    t.row([
        kind.to_string(),
        real(r.exponent),
        real(r.lo),
        real(r.hi),
        real(r.integral),
        real(r.main_term),
        opt_real(r.relative_deviation),
        r.constants_cutoff.to_string(),
        r.warning.clone().unwrap_or_default(),
    ]);
}

fn moment(a: &MomentArgs) -> Result<Files, CliError> {
    if a.k.is_empty() && a.abs.is_empty() {
        return Err(CliError::Usage("moment needs --k and/or --A".into()));
    }
    let c = SeriesConstants::compute(a.low_cutoff, a.high_cutoff)?;
    let mut t = Table::new(&MOMENT_HEADER);
    if !a.k.is_empty() {
        for r in moment_profile(&a.k, &a.x, &c)? {
            moment_row(&mut t, "signed", &r);
        }
    }
    if !a.abs.is_empty() {
        for r in abs_moment_profile(&a.abs, &a.x, &c)? {
            moment_row(&mut t, "absolute", &r);
        }
    }
    Ok(vec![("moment.csv".into(), t.into_bytes(), true)])
}

fn window(a: &WindowArgs) -> Result<Files, CliError> {
    let spec = WindowSpec::new(a.x, a.h, a.delta)?;
    let c = SeriesConstants::compute(a.low_cutoff, a.high_cutoff)?;
    let mut t = Table::new(&MOMENT_HEADER);
    for &k in &a.k {
        let r = window_moment(&spec, k, &c)?;
        if let Some(w) = &r.warning {
            eprintln!("warning: {w}");
        }
        moment_row(&mut t, "window", &r);
    }
    Ok(vec![("window.csv".into(), t.into_bytes(), true)])
}

fn expsum(a: &ExpsumArgs) -> Result<Files, CliError> {
    let mut t = Table::new(&["U", "N", "k", "samples", "integral", "bound", "ratio"]);
    let mut grid = Table::new(&["x", "N", "k", "re", "im", "modulus"]);
    for &u in &a.u {
        let m = moment8_s(u, a.n, a.k, a.samples)?;
        t.row([
            real(u),
            a.n.to_string(),
            a.k.to_string(),
            m.samples.to_string(),
            real(m.integral),
            real(m.bound),
            real(m.ratio),
        ]);
        if a.grid > 0 {
            let step = u / a.grid as f64;
            let points: Vec<_> = (0..a.grid)
                .into_par_iter()
                .map(|j| eval_s(u + (j as f64 + 0.5) * step, a.n, a.k))
                .collect::<Result<_, LabError>>()?;
            for s in points {
                grid.row([real(s.x), s.n.to_string(), s.root.to_string(), real(s.re), real(s.im), real(s.modulus())]);
            }
        }
    }
    let mut files = vec![("expsum.csv".to_string(), t.into_bytes(), true)];
    if a.grid > 0 {
        files.push(("expsum_grid.csv".into(), grid.into_bytes(), false));
    }
    Ok(files)
}

fn verify(a: &VerifyArgs, threads: Option<usize>) -> Result<(Files, Result<(), CliError>), CliError> {
    let ids: Vec<u8> = if a.criteria.is_empty() { SUITE_IDS.to_vec() } else { a.criteria.clone() };
    if let Some(bad) = ids.iter().find(|id| !SUITE_IDS.contains(id)) {
        return Err(CliError::Usage(format!("criterion {bad} is not in 1..=12")));
    }
    let threads = threads.unwrap_or_else(rayon::current_num_threads);
    let first = run_suite_with_threads(&ids, threads)?;
    for o in &first {
        println!("{}", o.line());
    }
    let second = run_suite_with_threads(&ids, a.compare_threads)?;
    let repeat = determinism(&first, &second, (threads, a.compare_threads));
    println!("{}", repeat.line());
    let mut t = Table::new(&["criterion", "title", "passed", "label", "value"]);
    let all: Vec<&CriterionOutcome> = first.iter().chain([&repeat]).collect();
    for o in &all {
        for obs in &o.observations {
            t.row([o.id.to_string(), o.title.to_string(), o.passed.to_string(), obs.label.clone(), real(obs.value)]);
        }
    }
    let failed: Vec<u8> = all.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    let verdict = if failed.is_empty() { Ok(()) } else { Err(CliError::Failed(failed)) };
    Ok((vec![("verify.csv".into(), t.into_bytes(), false)], verdict))
}
