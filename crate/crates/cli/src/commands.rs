use std::sync::Arc;

use num_bigint::BigUint;
use serde::Serialize;
use sigma_lab::arith::{sigma_pow, Budget};
use sigma_lab::congruence::{
    conjecture_scan, ctr_scan, meta_scan, periodicity_probe, powersum_residue, CongruenceReport, CongruenceStatus,
};
use sigma_lab::iterate::{
    erdos_sampler, iterate_aliquot, iterate_sigma, lenstra_chain_search, AliquotStatus, SigmaStatus,
};
use sigma_lab::multiperfect::{lprime_filter, multiperfect_scan, MultiperfectRecord};
use sigma_lab::scan::default_jobs;
use sigma_lab::store::FactorCache;
use sigma_lab::verify::{validate_claims, verify_all, VerifyConfig};
use sigma_lab::{Error, Factorizer};

use crate::output::Output;
use crate::{Cli, Command, Format, Global, EXIT_COUNTEREXAMPLE, EXIT_IO, EXIT_OK, EXIT_UNRESOLVED, EXIT_USAGE};

enum Failure {
    Usage(String),
    Unresolved(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            e if e.is_resource_limit() => Failure::Unresolved(e.to_string()),
            Error::Io(_) | Error::Json(_) | Error::CorruptEntry { .. } => Failure::Io(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

struct Ctx {
    fz: Factorizer,
    jobs: usize,
    k_max: u32,
}

pub fn run(cli: Cli) -> u8 {
    match run_inner(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Unresolved(msg)) => {
            eprintln!("unresolved: {msg}");
            EXIT_UNRESOLVED
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            EXIT_IO
        }
    }
}

fn run_inner(cli: Cli) -> Outcome {
    let g = cli.global;
    let budget = Budget::new(g.budget_work, g.digit_limit as usize)?;
    let mut fz = Factorizer::new(budget);
    let cache = open_cache(&g)?;
    if let Some(c) = &cache {
        fz = fz.with_cache(c.clone());
    }
    let ctx = Ctx { fz, jobs: g.jobs.map_or_else(default_jobs, |j| j as usize), k_max: g.k_max };
    let mut out = Output::open(g.format, g.out.as_deref())?;
    let code = dispatch(cli.command, &ctx, &mut out)?;
    out.finish()?;
    if let Some(c) = &cache {
        c.flush()?;
    }
    Ok(code)
}

fn open_cache(g: &Global) -> Result<Option<Arc<FactorCache>>, Failure> {
    let Some(path) = &g.cache else {
        return Ok(None);
    };
    let cache = FactorCache::open(path).map_err(|e| Failure::Io(format!("cache {}: {e}", path.display())))?;
    for bad in cache.corrupt_entries() {
        eprintln!("warning: cache {} line {}: {} (skipped)", path.display(), bad.line, bad.reason);
    }
    Ok(Some(Arc::new(cache)))
}

fn check_range(from: u64, to: u64, min_from: u64) -> Result<(), Failure> {
    if from < min_from || to < from {
        return Err(Failure::Usage(format!("need {min_from} <= --from <= --to, got {from}..{to}")));
    }
    Ok(())
}

fn unsupported(format: Format, what: &str) -> Failure {
    Failure::Usage(format!("--format {format:?} is not available for {what}").to_lowercase())
}

fn dispatch(command: Command, ctx: &Ctx, out: &mut Output) -> Outcome {
    match command {
        Command::Factor { n } => factor(&n, ctx, out),
        Command::Sigma { n, iterate, power } => match power {
            Some(k) => sigma_power(&n, k, ctx, out),
            None => sigma_trace(&n, iterate.unwrap_or(1), ctx, out),
        },
        Command::Aliquot { n, steps } => aliquot(&n, steps.unwrap_or(ctx.k_max), ctx, out),
        Command::CtrScan { from, to, retry_factor } => {
            check_range(from, to, 2)?;
            let reports = ctr_scan(from, to, ctx.k_max, &ctx.fz, ctx.jobs, retry_factor)?;
            congruence_table(&reports, out)?;
            let open = reports.iter().filter(|r| r.status != CongruenceStatus::Resolved).count();
            if open > 0 {
                eprintln!("{open} of {} n without a k ≤ {}", reports.len(), ctx.k_max);
                return Ok(EXIT_UNRESOLVED);
            }
            Ok(EXIT_OK)
        }
        Command::MetaScan { n, limit } => {
            let ns =
                if n.is_empty() { multiperfect_scan(limit, ctx.jobs)?.into_iter().map(|r| r.n).collect() } else { n };
            let reports = meta_scan(&ns, ctx.k_max, &ctx.fz, ctx.jobs)?;
            if out.format == Format::Text {
                for r in &reports {
                    out.line(match (r.smallest_k, r.residue_table.last()) {
                        (Some(k), Some(row)) => {
                            format!("{}: first failure at k={k}, residue {}", r.n, row.residue)
                        }
                        _ => format!("{}: {} within k ≤ {}", r.n, r.status, r.k_horizon),
                    })?;
                }
            } else {
                congruence_table(&reports, out)?;
            }
            let all = reports.iter().all(|r| r.status == CongruenceStatus::Resolved);
            Ok(if all { EXIT_OK } else { EXIT_UNRESOLVED })
        }
        Command::MpScan { limit } => {
            let records = multiperfect_scan(limit, ctx.jobs)?;
            records_out(&records, out)?;
            Ok(EXIT_OK)
        }
        Command::Lprime { limit } => {
            let records = lprime_filter(&multiperfect_scan(limit, ctx.jobs)?);
            records_out(&records, out)?;
            let others: Vec<String> =
                records.iter().filter(|r| r.n != BigUint::from(6u32)).map(|r| r.n.to_string()).collect();
            if !others.is_empty() {
                eprintln!("counterexample: L prime for n = {}", others.join(", "));
                return Ok(EXIT_COUNTEREXAMPLE);
            }
            Ok(EXIT_OK)
        }
        Command::Periodicity { n, horizon } => periodicity(&n, horizon, ctx, out),
        Command::PowersumCheck { p_below, e_max, k_to } => powersum(p_below, e_max, k_to, out),
        Command::Lenstra { k, m_max } => lenstra(k, m_max, ctx, out),
        Command::ErdosSample { k, delta, from, to, violators } => {
            check_range(from, to, 2)?;
            let r = erdos_sampler(k, &delta, from, to, &ctx.fz, ctx.jobs, violators)?;
            match out.format {
                Format::Json => out.jsonl([&r])?,
                Format::Csv => return Err(unsupported(out.format, "erdos-sample")),
                Format::Text => {
                    out.line(format!("k={} delta={} m in [{}, {}]", r.k, r.delta, r.m_lo, r.m_hi))?;
                    out.line(format!(
                        "applicable {}, inapplicable {}, unresolved {}",
                        r.applicable, r.inapplicable, r.unresolved
                    ))?;
                    out.line(format!("violations by step {:?}", r.violations_by_step))?;
                    out.line(format!("violating {} ({} ≈ {:.4})", r.violating, r.fraction, r.fraction.approx()))?;
                    out.line(format!("first violators {:?}", r.violators))?;
                }
            }
            Ok(if r.unresolved > 0 { EXIT_UNRESOLVED } else { EXIT_OK })
        }
        Command::ConjectureScan { from, to } => {
            check_range(from, to, 2)?;
            let reports = conjecture_scan(from, to, ctx.jobs);
            match out.format {
                Format::Json => out.jsonl(&reports)?,
                Format::Csv => return Err(unsupported(out.format, "conjecture-scan")),
                Format::Text => {
                    if reports.is_empty() {
                        out.line(format!("no multiperfect n in [{from}, {to}] meets all three congruences"))?;
                    }
                    for r in &reports {
                        let failed: Vec<&str> = r.conclusions.iter().filter(|c| !c.passed).map(|c| c.name).collect();
                        out.line(format!(
                            "{}: structure {}",
                            r.n,
                            if failed.is_empty() { "holds".into() } else { failed.join(", ") }
                        ))?;
                    }
                }
            }
            let bad = reports.iter().filter(|r| !r.consistent()).count();
            Ok(if bad > 0 { EXIT_COUNTEREXAMPLE } else { EXIT_OK })
        }
        Command::VerifyAll { claim, ctr_k_max, mp_limit } => {
            validate_claims(&claim)?;
            let cfg = VerifyConfig {
                ctr_k_max,
                mp_limit,
                jobs: ctx.jobs,
                claims: (!claim.is_empty()).then_some(claim),
                ..VerifyConfig::default()
            };
            let report = verify_all(&cfg, &ctx.fz)?;
            match out.format {
                Format::Text => out.line(report.to_string())?,
                Format::Json => out.jsonl(&report.claims)?,
                Format::Csv => out.csv(&report.claims)?,
            }
            Ok(report.exit_code() as u8)
        }
    }
}

fn factor(ns: &[BigUint], ctx: &Ctx, out: &mut Output) -> Outcome {
    let mut done = Vec::new();
    let mut code = EXIT_OK;
    for n in ns {
        match ctx.fz.factor(n) {
            Ok(f) => done.push(f),
            Err(e) if e.is_resource_limit() => {
                eprintln!("{n}: {e}");
                code = EXIT_UNRESOLVED;
            }
            Err(e) => return Err(e.into()),
        }
    }
    match out.format {
        Format::Text => done.iter().try_for_each(|f| out.line(format!("{} = {}", f.value(), f)))?,
        Format::Json => out.jsonl(&done)?,
        Format::Csv => out.csv(&done)?,
    }
    Ok(code)
}

#[derive(Serialize)]
struct PowerSum {
    n: String,
    k: u32,
    value: String,
}

fn sigma_power(n: &BigUint, k: u32, ctx: &Ctx, out: &mut Output) -> Outcome {
    let f = ctx.fz.factor(n)?;
    let rec = PowerSum { n: n.to_string(), k, value: sigma_pow(&f, k).to_string() };
    match out.format {
        Format::Text => out.line(format!("sigma_{}({}) = {}", rec.k, rec.n, rec.value))?,
        Format::Json => out.jsonl([&rec])?,
        Format::Csv => out.csv_rows("n,k,value", [format!("{},{},{}", rec.n, rec.k, rec.value)])?,
    }
    Ok(EXIT_OK)
}

fn sigma_trace(n: &BigUint, k: u32, ctx: &Ctx, out: &mut Output) -> Outcome {
    let trace = iterate_sigma(n, k, &ctx.fz)?;
    let rows = trace.entries.iter().map(|e| format!("{},{},{}", e.k, e.value, e.residue_mod_start));
    match out.format {
        Format::Json => out.jsonl([&trace])?,
        Format::Csv => out.csv_rows("k,value,residue", rows)?,
        Format::Text => {
            for e in &trace.entries {
                out.line(format!("k={} {} ≡ {} (mod {})", e.k, e.value, e.residue_mod_start, n))?;
            }
        }
    }
    if trace.status != SigmaStatus::Complete {
        eprintln!("stopped: {} after {} work", trace.status, trace.work_used);
        return Ok(EXIT_UNRESOLVED);
    }
    Ok(EXIT_OK)
}

fn aliquot(n: &BigUint, steps: u32, ctx: &Ctx, out: &mut Output) -> Outcome {
    let trace = iterate_aliquot(n, steps, &ctx.fz)?;
    let rows = trace.entries.iter().map(|e| format!("{},{}", e.k, e.value));
    match out.format {
        Format::Json => out.jsonl([&trace])?,
        Format::Csv => out.csv_rows("k,value", rows)?,
        Format::Text => {
            for e in &trace.entries {
                out.line(format!("k={} {}", e.k, e.value))?;
            }
            out.line(format!("status {}", trace.status))?;
        }
    }
    Ok(match trace.status {
        AliquotStatus::BudgetExhausted | AliquotStatus::DigitLimit => EXIT_UNRESOLVED,
        _ => EXIT_OK,
    })
}

fn congruence_table(reports: &[CongruenceReport], out: &mut Output) -> Result<(), Failure> {
    match out.format {
        Format::Json => out.jsonl(reports)?,
        Format::Text | Format::Csv => out.csv(reports)?,
    }
    Ok(())
}

fn records_out(records: &[MultiperfectRecord], out: &mut Output) -> Result<(), Failure> {
    match out.format {
        Format::Json => out.jsonl(records)?,
        Format::Csv => out.csv(records)?,
        Format::Text => {
            for r in records {
                out.line(format!(
                    "{} index {} L {}{}{} = {}",
                    r.n,
                    r.index,
                    r.l,
                    if r.l_prime { " (prime)" } else { "" },
                    if r.squarefree { " squarefree" } else { "" },
                    r.factorization
                ))?;
            }
        }
    }
    Ok(())
}

fn periodicity(ns: &[BigUint], horizon: Option<u32>, ctx: &Ctx, out: &mut Output) -> Outcome {
    let mut reports = Vec::new();
    for n in ns {
        reports.push(periodicity_probe(&ctx.fz.factor(n)?, horizon)?);
    }
    match out.format {
        Format::Json => out.jsonl(&reports)?,
        Format::Csv => out.csv_rows(
            "n,l,horizon,observed_period,divides_l",
            reports.iter().map(|r| {
                let p = r.observed_period.map(|p| p.to_string()).unwrap_or_default();
                let d = r.divides_l.map(|d| d.to_string()).unwrap_or_default();
                format!("{},{},{},{},{}", r.n, r.l, r.horizon, p, d)
            }),
        )?,
        Format::Text => {
            for r in &reports {
                let residues: Vec<String> = r.residues.iter().map(|v| v.to_string()).collect();
                out.line(format!(
                    "{}: L {}, period {}, divides L: {}",
                    r.n,
                    r.l,
                    r.observed_period.map_or("none".into(), |p| p.to_string()),
                    r.divides_l.map_or("n/a".into(), |d| d.to_string())
                ))?;
                out.line(format!("  residues {}", residues.join(" ")))?;
            }
        }
    }
    Ok(if reports.iter().all(|r| r.observed_period.is_some()) { EXIT_OK } else { EXIT_UNRESOLVED })
}

fn powersum(p_below: u64, e_max: u32, k_to: u32, out: &mut Output) -> Outcome {
    let mut rows = Vec::new();
    for p in (2..p_below).filter(|&p| sigma_lab::arith::is_prime_u64(p)) {
        for e in 1..=e_max {
            for k in 1..=k_to {
                rows.push(powersum_residue(&BigUint::from(p), e, k)?);
            }
        }
    }
    let bad: Vec<_> = rows.iter().filter(|r| !r.matches || r.divisible != (r.r == 1)).collect();
    match out.format {
        Format::Json => out.jsonl(&rows)?,
        Format::Csv => out.csv(&rows)?,
        Format::Text => {
            out.line(format!(
                "{} cases (p < {p_below}, e ≤ {e_max}, k ≤ {k_to}), {} mismatches",
                rows.len(),
                bad.len()
            ))?;
            for r in &bad {
                out.line(format!("p={} e={} k={} predicted {} actual {}", r.p, r.e, r.k, r.predicted, r.actual))?;
            }
        }
    }
    Ok(if bad.is_empty() { EXIT_OK } else { EXIT_COUNTEREXAMPLE })
}

fn lenstra(k_max: u32, m_max: u64, ctx: &Ctx, out: &mut Output) -> Outcome {
    let mut chains = Vec::new();
    let mut code = EXIT_OK;
    for k in 1..=k_max {
        match lenstra_chain_search(k, m_max, &ctx.fz)? {
            Some(c) => chains.push(c),
            None => {
                eprintln!("k={k}: no m ≤ {m_max}");
                code = EXIT_UNRESOLVED;
            }
        }
    }
    match out.format {
        Format::Json => out.jsonl(&chains)?,
        Format::Csv => out.csv_rows(
            "k,m,chain",
            chains.iter().map(|c| {
                let chain: Vec<String> = c.chain.iter().map(|v| v.to_string()).collect();
                format!("{},{},{}", c.k, c.start(), chain.join(" "))
            }),
        )?,
        Format::Text => {
            for c in &chains {
                let chain: Vec<String> = c.chain.iter().map(|v| v.to_string()).collect();
                out.line(format!("k={}: m={} ({})", c.k, c.start(), chain.join(" < ")))?;
            }
        }
    }
    Ok(code)
}
