use std::fmt::Write as _;

use rayon::ThreadPool;

use super::{
    Artifact, Engine, ExperimentConfig, ExperimentError, ExperimentKind, Model, Outcome, Report, ReportRow, BAND_CRITICAL, BAND_DISTORTED,
    BAND_PROCESS, BAND_RATIO, BAND_THALER,
};
use crate::cf::sigma_tail_estimate;
use crate::digitchain::summarize_chain_batch;
use crate::distort::{critical_statistics, distorted};
use crate::exactreal::{digits_until_sum_exceeds, DigitStream};
use crate::limits::{LawKind, LimitLaw};
use crate::maps::{MapKind, WanderingSequence};
use crate::processes::multiprec::{waiting_with_ladder, ThalerPrecision};
use crate::processes::thaler::{ThalerOrbit, ThalerWaiting};
use crate::processes::{summarize_digits, waiting_record, HorizonSummary, LazyOrbit, ProcessError, WaitingRecord};
use crate::renewal::{renewal_record, renewal_wandering};
use crate::sampling::{derive_seed, par_chunks, par_map, sample_rng};
use crate::stats::{dkw_epsilon, ks_distance, ld_joint, ld_v_process, Ecdf};

const CHUNK: usize = 256;

pub(super) fn run(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<Outcome, ExperimentError> {
    match cfg.experiment {
        ExperimentKind::DynkinLamperti => dynkin_lamperti(cfg, pool),
        ExperimentKind::CriticalFarey => critical_farey(cfg, pool),
        ExperimentKind::CriticalThaler => critical_thaler(cfg, pool),
        ExperimentKind::LargeDeviation => large_deviation(cfg, pool),
        ExperimentKind::ContinuedFractions => continued_fractions(cfg, pool),
        ExperimentKind::Tables => tables(cfg),
        ExperimentKind::Records => records(cfg, pool),
        ExperimentKind::Digits => digits(cfg, pool),
    }
}

fn report_only(cfg: &ExperimentConfig, rows: Vec<ReportRow>) -> Outcome {
    Outcome {
        report: Report::new(cfg.experiment, rows),
        artifacts: Vec::new(),
    }
}

/// Farey summaries of every sample at every configured horizon, indexed
/// `[sample][horizon]`.
pub fn farey_summaries(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<Vec<Vec<HorizonSummary>>, ExperimentError> {
    let horizons = &cfg.horizons;
    match cfg.engine {
        Engine::Chain => Ok(par_chunks(pool, cfg.samples, CHUNK, |s, e| {
            summarize_chain_batch(cfg.seed, 0, s, e, horizons)
        })),
        Engine::Exact => par_map(pool, cfg.samples, |i| {
            let mut stream = DigitStream::lazy_dyadic(derive_seed(cfg.seed, 0, i as u64), cfg.bit_cap);
            summarize_digits(&mut stream, horizons)
        })
        .into_iter()
        .map(|r| r.map_err(ExperimentError::from))
        .collect(),
    }
}

fn lasota_yorke_records(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<Vec<Vec<WaitingRecord>>, ExperimentError> {
    par_map(pool, cfg.samples, |i| -> Result<Vec<WaitingRecord>, ProcessError> {
        let mut orbit = LazyOrbit::new(MapKind::LasotaYorke, derive_seed(cfg.seed, 0, i as u64), cfg.bit_cap)?;
        let visits = orbit.visits(cfg.max_horizon())?;
        cfg.horizons.iter().map(|&n| waiting_record(&visits, n)).collect()
    })
    .into_iter()
    .map(|r| r.map_err(ExperimentError::from))
    .collect()
}

/// Renewal records for `alphas[a]` at `horizons[h]`.
pub fn renewal_records(cfg: &ExperimentConfig, a: usize, h: usize, pool: &ThreadPool) -> Vec<WaitingRecord> {
    let (alpha, n) = (cfg.alphas[a], cfg.horizons[h]);
    let stream = ((a as u64) << 32) | h as u64;
    par_map(pool, cfg.samples, |i| {
        renewal_record(&mut sample_rng(cfg.seed, stream, i as u64), alpha, n)
    })
}

/// Thaler waiting data at `horizons[h]` with the precision that certified
/// it; `None` marks orbits that no configured precision could certify.
pub fn thaler_waitings(
    cfg: &ExperimentConfig,
    h: usize,
    pool: &ThreadPool,
) -> Result<Vec<Option<(ThalerWaiting, usize)>>, ExperimentError> {
    let n = cfg.horizons[h];
    let ladder: Vec<ThalerPrecision> = cfg.precisions.iter().map(|&p| ThalerPrecision::new(p)).collect::<Result<_, _>>()?;
    par_map(pool, cfg.samples, |i| {
        let x0 = ThalerOrbit::uniform(&mut sample_rng(cfg.seed, h as u64, i as u64)).point();
        waiting_with_ladder(x0, n, cfg.cap, &ladder)
    })
    .into_iter()
    .map(|r| r.map_err(ExperimentError::from))
    .collect()
}

fn ks(values: Vec<f64>, law: &LimitLaw) -> Result<f64, ExperimentError> {
    Ok(ks_distance(&Ecdf::new(values)?, law)?)
}

/// Bands apply at the largest horizon; smaller ones show the trend.
fn checked(cfg: &ExperimentConfig, n: u64, row: ReportRow, band: f64) -> ReportRow {
    if n == cfg.max_horizon() {
        row.banded(band)
    } else {
        row
    }
}

/// Strict decrease of a statistic along the horizons, if there are several.
fn decreasing_row(cfg: &ExperimentConfig, statistic: &str, values: &[f64]) -> Option<ReportRow> {
    if values.len() < 2 {
        return None;
    }
    let ok = values.windows(2).all(|w| w[1] < w[0]);
    let mut row = ReportRow::new(
        cfg.experiment,
        cfg.max_horizon(),
        cfg.samples,
        format!("decreasing:{statistic}"),
        if ok { 1.0 } else { 0.0 },
    );
    row.pass = Some(ok);
    Some(row.note(format!("{values:?}")))
}

fn dynkin_lamperti(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<Outcome, ExperimentError> {
    let mut rows = Vec::new();
    for (a, &alpha) in cfg.alphas.iter().enumerate() {
        for (h, &n) in cfg.horizons.iter().enumerate() {
            let records = renewal_records(cfg, a, h, pool);
            let w = renewal_wandering(alpha, n);
            let nf = n as f64;
            let mut push = |stat: &str, law: LawKind, values: Vec<f64>, band: f64| -> Result<(), ExperimentError> {
                let d = ks(values, &LimitLaw::new(law, alpha)?)?;
                rows.push(checked(
                    cfg,
                    n,
                    ReportRow::new(cfg.experiment, n, cfg.samples, format!("ks:{stat}~{law}"), d).alpha(alpha),
                    band,
                ));
                Ok(())
            };
            push("Y/n", LawKind::Phi, records.iter().map(|r| r.y as f64 / nf).collect(), BAND_PROCESS)?;
            push("V/n", LawKind::Eta, records.iter().map(|r| r.v as f64 / nf).collect(), BAND_PROCESS)?;
            let distorted: Vec<_> = records.iter().map(|r| distorted(r, &w)).collect::<Result<_, _>>()?;
            push(
                "Lambda",
                LawKind::Lambda,
                distorted.iter().map(|d| d.lambda).collect(),
                BAND_DISTORTED,
            )?;
            push("Gamma", LawKind::Gamma, distorted.iter().map(|d| d.gamma).collect(), BAND_DISTORTED)?;
            push("Delta", LawKind::Delta, distorted.iter().map(|d| d.delta).collect(), BAND_DISTORTED)?;
            push("Theta", LawKind::Theta, distorted.iter().map(|d| d.theta).collect(), BAND_DISTORTED)?;
            rows.push(ReportRow::new(cfg.experiment, n, cfg.samples, "dkw_epsilon(0.01)", dkw_epsilon(cfg.samples, 0.01)).alpha(alpha));
        }
    }
    Ok(report_only(cfg, rows))
}

fn critical_farey(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<Outcome, ExperimentError> {
    let uniform = LimitLaw::uniform();
    let mut rows = Vec::new();
    let per_horizon: Vec<Vec<WaitingRecord>> = match cfg.map {
        Model::LasotaYorke => transpose(lasota_yorke_records(cfg, pool)?),
        _ => transpose(farey_summaries(cfg, pool)?)
            .into_iter()
            .map(|col| col.into_iter().map(|s| s.record).collect())
            .collect(),
    };
    let (first, second) = match cfg.map {
        Model::LasotaYorke => ("logV/logn", "log(Y-n)/logn"),
        _ => ("Lambda", "Delta"),
    };
    let mut trend = (Vec::new(), Vec::new());
    for (records, &n) in per_horizon.iter().zip(&cfg.horizons) {
        let (a, b): (Vec<f64>, Vec<f64>) = match cfg.map {
            Model::LasotaYorke => records
                .iter()
                .map(|r| {
                    let c = critical_statistics(r, n);
                    (c.log_v_over_log_n, c.log_excess_over_log_n)
                })
                .unzip(),
            _ => {
                rows.push(ReportRow::new(cfg.experiment, n, cfg.samples, "W_n", crate::maps::farey_wandering(n)).note("log(n + 2)"));
                let w = WanderingSequence::Farey;
                records
                    .iter()
                    .map(|r| distorted(r, &w).map(|d| (d.lambda, d.delta)))
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .unzip()
            }
        };
        let (ka, kb) = (ks(a, &uniform)?, ks(b, &uniform)?);
        trend.0.push(ka);
        trend.1.push(kb);
        rows.push(checked(
            cfg,
            n,
            ReportRow::new(cfg.experiment, n, cfg.samples, format!("ks:{first}~uniform01"), ka),
            BAND_CRITICAL,
        ));
        rows.push(checked(
            cfg,
            n,
            ReportRow::new(cfg.experiment, n, cfg.samples, format!("ks:{second}~uniform01"), kb),
            BAND_CRITICAL,
        ));
    }
    rows.extend(decreasing_row(cfg, &format!("ks:{first}~uniform01"), &trend.0));
    rows.extend(decreasing_row(cfg, &format!("ks:{second}~uniform01"), &trend.1));
    Ok(report_only(cfg, rows))
}

fn transpose<T: Clone>(rows: Vec<Vec<T>>) -> Vec<Vec<T>> {
    let width = rows.first().map_or(0, Vec::len);
    (0..width).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect()
}

fn critical_thaler(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<Outcome, ExperimentError> {
    let mut rows = Vec::new();
    for (h, &n) in cfg.horizons.iter().enumerate() {
        let results = thaler_waitings(cfg, h, pool)?;
        let degraded = results.iter().filter(|r| r.is_none()).count();
        let kept: Vec<ThalerWaiting> = results.iter().flatten().map(|(w, _)| *w).collect();
        for bits in std::iter::once(106).chain(
            cfg.precisions
                .iter()
                .map(|&p| ThalerPrecision::new(p).map(|c| c.bits()))
                .collect::<Result<Vec<_>, _>>()?,
        ) {
            let count = results.iter().flatten().filter(|(_, b)| *b == bits).count();
            rows.push(ReportRow::new(
                cfg.experiment,
                n,
                cfg.samples,
                format!("certified_at_{bits}_bits"),
                count as f64,
            ));
        }
        let fraction = degraded as f64 / cfg.samples as f64;
        if fraction > cfg.max_degraded {
            return Err(ExperimentError::Degraded {
                degraded,
                samples: cfg.samples,
                max: cfg.max_degraded,
            });
        }
        rows.push(ReportRow::new(cfg.experiment, n, cfg.samples, "degraded_fraction", fraction).banded(cfg.max_degraded));
        let censored = kept.iter().filter(|w| w.v.is_none()).count();
        rows.push(
            ReportRow::new(
                cfg.experiment,
                n,
                cfg.samples,
                "censored_fraction",
                censored as f64 / kept.len().max(1) as f64,
            )
            .note(format!("cap {}", cfg.cap)),
        );
        let ln_n = (n as f64).ln();
        for &x in &cfg.x_grid {
            let hits = kept
                .iter()
                .filter(|w| match w.v {
                    None => true,
                    Some(v) => v > 1 && ln_n / (v as f64).ln() <= x,
                })
                .count();
            let p = hits as f64 / kept.len().max(1) as f64;
            let row = ReportRow::new(cfg.experiment, n, kept.len(), "P(logn/logV<=x)", p)
                .x(x)
                .reference(x.min(1.0));
            rows.push(if x < 1.0 {
                checked(cfg, n, row, BAND_THALER)
            } else {
                row.note("limit value 1, approached slowly")
            });
        }
    }
    Ok(report_only(cfg, rows))
}

fn fmt_ci(ci: (f64, f64)) -> String {
    format!("[{}, {}]", ci.0, ci.1)
}

fn large_deviation(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<Outcome, ExperimentError> {
    let columns = transpose(farey_summaries(cfg, pool)?);
    let mut rows = Vec::new();
    for (summaries, &n) in columns.iter().zip(&cfg.horizons) {
        let records: Vec<WaitingRecord> = summaries.iter().map(|s| s.record).collect();
        for &x in &cfg.x_grid {
            let e = ld_v_process(&records, n, x)?;
            let row = ReportRow::new(cfg.experiment, n, cfg.samples, "ld:V_n/n>x", e.ratio)
                .x(x)
                .reference(1.0)
                .note(format!("p_hat {} ci {} asymptote {}", e.p_hat, fmt_ci(e.ci), e.reference));
            rows.push(checked(cfg, n, row, BAND_RATIO));
        }
        for &[x, y] in &cfg.xy_grid {
            let e = ld_joint(&records, n, x, y)?;
            let row = ReportRow::new(cfg.experiment, n, cfg.samples, "ld:(n-Z_n)/n>=x,(Y_n-n)/n>y", e.ratio)
                .x(x)
                .y(y)
                .reference(1.0)
                .note(format!("p_hat {} ci {} asymptote {}", e.p_hat, fmt_ci(e.ci), e.reference));
            rows.push(checked(cfg, n, row, BAND_RATIO));
        }
        let sigmas: Vec<u64> = summaries.iter().map(|s| s.sigma).collect();
        rows.extend(sigma_tail_rows(cfg, n, &sigmas)?);
    }
    Ok(report_only(cfg, rows))
}

fn sigma_tail_rows(cfg: &ExperimentConfig, n: u64, sigmas: &[u64]) -> Result<Vec<ReportRow>, ExperimentError> {
    cfg.x_grid
        .iter()
        .map(|&x| {
            let t = sigma_tail_estimate(sigmas, n, x)?;
            let mut note = format!("p_hat {} ci {} asymptote {}", t.p_hat, fmt_ci(t.ci), t.reference);
            if t.beyond_hypothesis {
                note.push_str("; x >= 1 lies outside the stated range");
            }
            let row = ReportRow::new(cfg.experiment, n, cfg.samples, "tail:sigma_n/n>x", t.ratio)
                .x(x)
                .reference(1.0)
                .note(note);
            Ok(checked(cfg, n, row, BAND_RATIO))
        })
        .collect()
}

fn continued_fractions(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<Outcome, ExperimentError> {
    let columns = transpose(farey_summaries(cfg, pool)?);
    let uniform = LimitLaw::uniform();
    let mut rows = Vec::new();
    let mut trend = Vec::new();
    for (summaries, &n) in columns.iter().zip(&cfg.horizons) {
        let ln_n = (n as f64).ln();
        let stat: Vec<f64> = summaries.iter().map(|s| (s.sigma as f64).ln() / ln_n).collect();
        let d = ks(stat, &uniform)?;
        trend.push(d);
        rows.push(checked(
            cfg,
            n,
            ReportRow::new(cfg.experiment, n, cfg.samples, "ks:logsigma/logn~uniform01", d),
            BAND_CRITICAL,
        ));
        let psi_mean = summaries.iter().map(|s| s.psi as f64).sum::<f64>() / summaries.len() as f64;
        rows.push(ReportRow::new(cfg.experiment, n, cfg.samples, "mean:psi_n", psi_mean));
        let sigmas: Vec<u64> = summaries.iter().map(|s| s.sigma).collect();
        rows.extend(sigma_tail_rows(cfg, n, &sigmas)?);
    }
    rows.extend(decreasing_row(cfg, "ks:logsigma/logn~uniform01", &trend));
    Ok(report_only(cfg, rows))
}

fn table_range(kind: LawKind) -> (f64, f64) {
    match kind {
        LawKind::Lambda | LawKind::Theta | LawKind::Uniform01 | LawKind::PointMass => (0.0, 1.0),
        LawKind::Phi => (1.0, 11.0),
        LawKind::Eta | LawKind::Gamma | LawKind::Delta => (0.0, 10.0),
    }
}

fn tables(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let mut rows = Vec::new();
    let mut artifacts = Vec::new();
    for &kind in &cfg.laws {
        let laws: Vec<(String, LimitLaw, Option<f64>)> = if kind == LawKind::Uniform01 {
            vec![(kind.name().to_string(), LimitLaw::uniform(), None)]
        } else {
            cfg.alphas
                .iter()
                .map(|&a| Ok((format!("{}_alpha{a}", kind.name()), LimitLaw::new(kind, a)?, Some(a))))
                .collect::<Result<_, ExperimentError>>()?
        };
        let (lo, hi) = table_range(kind);
        for (name, law, alpha) in laws {
            let mut csv = String::from("x,pdf,cdf\n");
            let m = cfg.grid_points;
            for i in 0..m {
                let x = lo + (hi - lo) * i as f64 / (m - 1) as f64;
                writeln!(csv, "{x},{},{}", law.pdf(x)?, law.cdf(x)?).expect("write to string");
            }
            artifacts.push(Artifact {
                name: format!("{name}.csv"),
                contents: csv,
            });
            if kind != LawKind::Uniform01 {
                let mut row = ReportRow::new(cfg.experiment, 0, 0, format!("mass:{kind}"), law.direct_mass()?)
                    .reference(1.0)
                    .banded(1e-8);
                row.alpha = alpha;
                rows.push(row);
            }
        }
    }
    Ok(Outcome {
        report: Report::new(cfg.experiment, rows),
        artifacts,
    })
}

fn records(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<Outcome, ExperimentError> {
    let header = format!("sample,{}", WaitingRecord::CSV_HEADER);
    let mut artifacts = Vec::new();
    let write = |name: String,
                 per_sample: &[Vec<WaitingRecord>],
                 w: Option<&dyn Fn(u64) -> WanderingSequence>|
     -> Result<Artifact, ExperimentError> {
        let mut csv = header.clone();
        if w.is_some() {
            csv.push(',');
            csv.push_str(crate::distort::DistortedValues::CSV_HEADER);
        }
        csv.push('\n');
        for (i, recs) in per_sample.iter().enumerate() {
            for r in recs {
                write!(csv, "{i},{}", r.csv_row()).expect("write to string");
                if let Some(w) = w {
                    write!(csv, ",{}", distorted(r, &w(r.n))?.csv_row()).expect("write to string");
                }
                csv.push('\n');
            }
        }
        Ok(Artifact { name, contents: csv })
    };
    match cfg.map {
        Model::Farey => {
            let recs: Vec<Vec<WaitingRecord>> = farey_summaries(cfg, pool)?
                .into_iter()
                .map(|s| s.into_iter().map(|s| s.record).collect())
                .collect();
            artifacts.push(write("records.csv".into(), &recs, Some(&|_| WanderingSequence::Farey))?);
        }
        Model::LasotaYorke => {
            artifacts.push(write("records.csv".into(), &lasota_yorke_records(cfg, pool)?, None)?);
        }
        Model::Renewal => {
            for (a, &alpha) in cfg.alphas.iter().enumerate() {
                let columns: Vec<Vec<WaitingRecord>> = (0..cfg.horizons.len()).map(|h| renewal_records(cfg, a, h, pool)).collect();
                let recs = transpose(columns);
                let w = |n: u64| renewal_wandering(alpha, n);
                artifacts.push(write(format!("records_alpha{alpha}.csv"), &recs, Some(&w))?);
            }
        }
        Model::Thaler0 => unreachable!("rejected by validation"),
    }
    Ok(Outcome {
        report: Report::new(cfg.experiment, Vec::new()),
        artifacts,
    })
}

fn digits(cfg: &ExperimentConfig, pool: &ThreadPool) -> Result<Outcome, ExperimentError> {
    let n = cfg.max_horizon();
    let all = par_map(pool, cfg.samples, |i| {
        let mut stream = DigitStream::lazy_dyadic(derive_seed(cfg.seed, 0, i as u64), cfg.bit_cap);
        digits_until_sum_exceeds(&mut stream, n)
    });
    let mut csv = String::from("sample,index,digit\n");
    for (i, d) in all.into_iter().enumerate() {
        for (k, digit) in d?.into_iter().enumerate() {
            writeln!(csv, "{i},{},{digit}", k + 1).expect("write to string");
        }
    }
    Ok(Outcome {
        report: Report::new(cfg.experiment, Vec::new()),
        artifacts: vec![Artifact {
            name: "digits.csv".into(),
            contents: csv,
        }],
    })
}
