use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{Ledger, Stage};
use crate::detect::{detect_on_predictions, detect_on_targets, ModeReport, TestSet};
use crate::error::{Error, Result};
use crate::faults::{build_dataset, DatasetInputs, SynthRow};
use crate::io::{ingest, read_csv, read_json, write_bands, write_csv, write_json, write_monitoring, RunConfig};
use crate::losses::{compute_loss_profile, DailyLoss, LossInputs, LossProfile, SoilingInterval};
use crate::nn::{self, kfold_cv, metrics, EpochRecord, Metrics, TargetSignal, TrainedModel};
use crate::reference::{reference_monitoring, reference_weather};
use crate::rng::derive_seed;
use crate::series::{day_ranges, ElectricalRecord, MonitoringRecord, SLOTS_PER_DAY};
use crate::simulate::{simulate_series, ProductionSample, SystemSpec};
use crate::synth::{
    build_envelopes, classify_days, month_category_weights, synthesize_days, SkyCategory, SynthDay, TemperaturePools,
};

/// One 5-minute sample of synthetic weather.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherRow {
    pub timestamp: NaiveDateTime,
    pub category: SkyCategory,
    pub g_poa: f64,
    pub t_amb: f64,
    pub t_cell: f64,
}

/// One fault target at one affected timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub timestamp: NaiveDateTime,
    pub fault: String,
    pub signal: String,
    /// Percent.
    pub magnitude: f64,
}

/// [`Metrics`] without the per-sample error series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MetricSummary {
    n: usize,
    rmse: f64,
    r2: Option<f64>,
    mape: Option<f64>,
    meape: Option<f64>,
}

impl From<&Metrics> for MetricSummary {
    fn from(m: &Metrics) -> Self {
        MetricSummary {
            n: m.n,
            rmse: m.rmse,
            r2: m.r2,
            mape: m.mape,
            meape: m.meape,
        }
    }
}

fn specs(cfg: &RunConfig) -> Result<Vec<SystemSpec>> {
    cfg.system_specs()
}

// ---- simulate ----

pub(super) fn simulate(cfg: &RunConfig, l: &mut Ledger<'_>) -> Result<()> {
    for (sc, sys) in cfg.systems.iter().zip(specs(cfg)?) {
        let n = &sys.name;
        let source = match &sc.monitoring {
            Some(p) => l.external(p)?,
            None => {
                let seed = l.seed("corpus", cfg.seeds.corpus);
                let w = reference_weather(&cfg.site, &sys.orientation, cfg.corpus.start, cfg.corpus.end, seed)?;
                let corpus = reference_monitoring(&sys, &w, seed)?;
                let p = l.output(&format!("{n}_source.csv"));
                write_monitoring(&p, &corpus.records)?;
                p
            }
        };
        let data = ingest(&source)?;
        write_monitoring(l.output(&format!("{n}_measured.csv")), &data.records)?;
        write_json(l.output(&format!("{n}_ingest.json")), &data.report)?;

        let meteo: Vec<_> = data.records.iter().map(|r| r.meteo()).collect();
        let sim = simulate_series(&sys, &meteo)?;
        write_csv(l.output(&format!("{n}_simulated.csv")), &sim)?;

        let day: Vec<usize> = (0..sim.len()).filter(|&i| data.records[i].g_poa > 0.0).collect();
        let mut validation = BTreeMap::new();
        type Get<T> = fn(&T) -> f64;
        let signals: [(&str, Get<MonitoringRecord>, Get<ProductionSample>); 4] = [
            ("i_dc", |r| r.i_dc, |s| s.i_dc),
            ("v_dc", |r| r.v_dc, |s| s.v_dc),
            ("p_dc", |r| r.p_dc, |s| s.p_dc),
            ("p_ac", |r| r.p_ac, |s| s.p_ac),
        ];
        for (name, fm, fs) in signals {
            let y: Vec<f64> = day.iter().map(|&i| fm(&data.records[i])).collect();
            let yh: Vec<f64> = day.iter().map(|&i| fs(&sim[i])).collect();
            if !y.is_empty() {
                validation.insert(name, MetricSummary::from(&metrics(&y, &yh)?));
            }
        }
        write_json(l.output(&format!("{n}_validation.json")), &validation)?;
    }
    Ok(())
}

fn measured(l: &mut Ledger<'_>, name: &str) -> Result<Vec<MonitoringRecord>> {
    Ok(ingest(l.input(Stage::Simulate, &format!("{name}_measured.csv"))?)?.records)
}

// ---- losses ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SoilingSummary {
    r_s_h: f64,
    r_s_h_ci: (f64, f64),
    cleaning_events: Vec<NaiveDate>,
    intervals: Vec<SoilingInterval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct SoilingDay {
    date: NaiveDate,
    pm_filtered: f64,
    soiling_ratio: f64,
}

pub(super) fn losses(cfg: &RunConfig, l: &mut Ledger<'_>) -> Result<()> {
    let seed = l.seed("losses", cfg.seeds.losses);
    for sys in specs(cfg)? {
        let n = &sys.name;
        let meas = measured(l, n)?;
        let sim: Vec<ProductionSample> = read_csv(l.input(Stage::Simulate, &format!("{n}_simulated.csv"))?)?;
        let elec: Vec<ElectricalRecord> = sim
            .iter()
            .map(|s| ElectricalRecord {
                timestamp: s.timestamp,
                i_dc: s.i_dc,
                v_dc: s.v_dc,
                p_dc: s.p_dc,
                p_ac: s.p_ac,
            })
            .collect();
        let inp = LossInputs {
            measured: &meas,
            simulated: &elec,
            gamma_pmp: sys.module.gamma_pmp,
            dc_wiring: sys.dc_wiring,
            ac_wiring: sys.ac_wiring,
            v_ac: sys.inverter.v_ac,
            degradation_rate: cfg.losses.degradation_rate,
            degradation_start: cfg.losses.degradation_start,
            soiling: cfg.losses.soiling,
        };
        let rep = compute_loss_profile(&inp, seed)?;
        write_csv(l.output(&format!("{n}_daily.csv")), &rep.profile.days)?;
        write_csv(l.output(&format!("{n}_performance.csv")), &rep.performance.days)?;
        let summary = rep.soiling.as_ref().map(|s| SoilingSummary {
            r_s_h: s.r_s_h,
            r_s_h_ci: s.r_s_h_ci,
            cleaning_events: s.events.clone(),
            intervals: s.intervals.clone(),
        });
        write_json(l.output(&format!("{n}_soiling.json")), &summary)?;
        let profile: Vec<SoilingDay> = rep
            .soiling
            .iter()
            .flat_map(|s| {
                s.dates.iter().enumerate().map(|(i, &date)| SoilingDay {
                    date,
                    pm_filtered: s.pm_filtered[i],
                    soiling_ratio: s.median_profile[i],
                })
            })
            .collect();
        write_csv(l.output(&format!("{n}_soiling_profile.csv")), &profile)?;
    }
    Ok(())
}

// ---- synth ----

pub(super) fn synth(cfg: &RunConfig, l: &mut Ledger<'_>) -> Result<()> {
    let seed = l.seed("synth", cfg.seeds.synth);
    for sys in specs(cfg)? {
        let n = &sys.name;
        let meteo: Vec<_> = measured(l, n)?.iter().map(|r| r.meteo()).collect();
        let classes = classify_days(&meteo, &cfg.site, &sys.orientation)?;
        if classes.is_empty() {
            return Err(Error::input(format!(
                "system {n}: no daylight history to synthesise from"
            )));
        }
        let env = build_envelopes(&meteo, &classes);
        let pools = TemperaturePools::build(&meteo, &classes, sys.module.t_noct);
        let weights = month_category_weights(&classes);
        let days = synthesize_days(&env, &pools, &weights, cfg.synth.start, cfg.synth.n_days, seed)?;
        let rows: Vec<WeatherRow> = days
            .iter()
            .flat_map(|d| {
                crate::series::day_timestamps(d.date)
                    .into_iter()
                    .enumerate()
                    .map(move |(s, t)| WeatherRow {
                        timestamp: t,
                        category: d.category,
                        g_poa: d.g_poa[s],
                        t_amb: d.t_amb[s],
                        t_cell: d.t_cell[s],
                    })
            })
            .collect();
        write_csv(l.output(&format!("{n}_history_classes.csv")), &classes)?;
        write_csv(l.output(&format!("{n}_weather.csv")), &rows)?;
    }
    Ok(())
}

fn weather_days(rows: &[WeatherRow]) -> Result<Vec<SynthDay>> {
    day_ranges(rows, |r| r.timestamp)
        .into_iter()
        .map(|(date, range)| {
            let day = &rows[range];
            if day.len() != SLOTS_PER_DAY {
                return Err(Error::input(format!("synthetic day {date} has {} samples", day.len())));
            }
            Ok(SynthDay {
                date,
                category: day[0].category,
                g_poa: day.iter().map(|r| r.g_poa).collect(),
                t_amb: day.iter().map(|r| r.t_amb).collect(),
                t_cell: day.iter().map(|r| r.t_cell).collect(),
            })
        })
        .collect()
}

// ---- inject ----

pub(super) fn inject(cfg: &RunConfig, l: &mut Ledger<'_>) -> Result<()> {
    let seed = l.seed("inject", cfg.seeds.inject);
    let faults = cfg.faults()?;
    for sys in specs(cfg)? {
        let n = &sys.name;
        let rows: Vec<WeatherRow> = read_csv(l.input(Stage::Synth, &format!("{n}_weather.csv"))?)?;
        let days = weather_days(&rows)?;
        let archive: Vec<DailyLoss> = read_csv(l.input(Stage::Losses, &format!("{n}_daily.csv"))?)?;
        let losses = LossProfile {
            days: if cfg.stages.losses_in_synth {
                archive
            } else {
                Vec::new()
            },
        };
        let ds = build_dataset(
            &DatasetInputs {
                system: &sys,
                location: &cfg.site,
                days: &days,
                losses: &losses,
                faults: &faults,
            },
            seed,
        )?;
        let events: Vec<EventRow> = ds
            .schedules
            .iter()
            .flat_map(|s| &s.events)
            .flat_map(|e| {
                faults[e.fault]
                    .targets
                    .iter()
                    .zip(&e.magnitudes)
                    .map(|(t, &m)| EventRow {
                        timestamp: e.timestamp,
                        fault: e.name.clone(),
                        signal: t.signal.name().into(),
                        magnitude: m,
                    })
            })
            .collect();
        write_csv(l.output(&format!("{n}_clean.csv")), &ds.clean)?;
        write_csv(l.output(&format!("{n}_faulted.csv")), &ds.faulted)?;
        write_csv(l.output(&format!("{n}_events.csv")), &events)?;
        write_csv(l.output(&format!("{n}_days.csv")), &ds.days)?;
        write_csv(l.output(&format!("{n}_losses.csv")), &ds.losses)?;
    }
    Ok(())
}

/// Last `n` distinct dates of the rows.
fn detection_dates(rows: &[SynthRow], n: usize) -> BTreeSet<NaiveDate> {
    let all: BTreeSet<NaiveDate> = rows.iter().map(|r| r.timestamp.date()).collect();
    all.iter().rev().take(n).copied().collect()
}

// ---- train ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FoldSummary {
    fold: usize,
    test_size: usize,
    metrics: MetricSummary,
    loss_trend_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CvSummary {
    target: String,
    rows: usize,
    mean_rmse: f64,
    mean_r2: Option<f64>,
    mean_meape: Option<f64>,
    loss_trend_ok: bool,
    folds: Vec<FoldSummary>,
}

pub(super) fn train(cfg: &RunConfig, l: &mut Ledger<'_>) -> Result<()> {
    let base = l.seed("train", cfg.seeds.train);
    for sys in specs(cfg)? {
        let n = &sys.name;
        let clean: Vec<SynthRow> = read_csv(l.input(Stage::Inject, &format!("{n}_clean.csv"))?)?;
        let held = detection_dates(&clean, cfg.detect.days);
        let rows: Vec<SynthRow> = clean
            .into_iter()
            .filter(|r| !held.contains(&r.timestamp.date()))
            .collect();
        let mut cv = Vec::new();
        for t in cfg.targets()? {
            let data = nn::build_dataset(&rows, t);
            if data.len() < 20 {
                return Err(Error::input(format!(
                    "system {n}: only {} productive rows to train {t}",
                    data.len()
                )));
            }
            let net = cfg.network(t, data.len());
            let seed = derive_seed(base, &format!("{n}/{t}"), 0);
            let model = nn::train(&data, &net, seed)?;
            std::fs::write(l.output(&format!("{n}_{t}.json")), model.to_json()? + "\n")
                .map_err(|e| Error::io(format!("{n}_{t}.json"), e))?;
            write_csv(l.output(&format!("{n}_{t}_history.csv")), &model.history)?;
            if cfg.stages.cross_validate {
                let r = kfold_cv(&data, &net, seed)?;
                cv.push(CvSummary {
                    target: t.name().into(),
                    rows: data.len(),
                    mean_rmse: r.mean_rmse(),
                    mean_r2: r.mean_r2(),
                    mean_meape: r.mean_meape(),
                    loss_trend_ok: r.loss_trend_ok(),
                    folds: r
                        .folds
                        .iter()
                        .map(|f| FoldSummary {
                            fold: f.fold,
                            test_size: f.test_size,
                            metrics: (&f.metrics).into(),
                            loss_trend_ok: f.loss_trend_ok,
                        })
                        .collect(),
                });
            }
        }
        if cfg.stages.cross_validate {
            write_json(l.output(&format!("{n}_cv.json")), &cv)?;
        }
    }
    Ok(())
}

// ---- detect ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DetectionReport {
    system: String,
    history_days: usize,
    test_days: usize,
    test_points: usize,
    faulty_points: usize,
    modes: Vec<ModeReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct LabelRow {
    timestamp: NaiveDateTime,
    truth: u8,
    max_magnitude: f64,
    target: u8,
    prediction: Option<u8>,
}

pub(super) fn detect(cfg: &RunConfig, l: &mut Ledger<'_>) -> Result<()> {
    let strategy = cfg.strategy()?;
    let grouping = cfg.grouping()?;
    let signals = cfg.detect_signals()?;
    for sys in specs(cfg)? {
        let n = &sys.name;
        let clean: Vec<SynthRow> = read_csv(l.input(Stage::Inject, &format!("{n}_clean.csv"))?)?;
        let faulted: Vec<SynthRow> = read_csv(l.input(Stage::Inject, &format!("{n}_faulted.csv"))?)?;
        let events: Vec<EventRow> = read_csv(l.input(Stage::Inject, &format!("{n}_events.csv"))?)?;
        let held = detection_dates(&faulted, cfg.detect.days);
        let history: Vec<SynthRow> = clean
            .iter()
            .filter(|r| r.g_poa > 0.0 && !held.contains(&r.timestamp.date()))
            .copied()
            .collect();
        let test: Vec<SynthRow> = faulted
            .iter()
            .filter(|r| r.g_poa > 0.0 && held.contains(&r.timestamp.date()))
            .copied()
            .collect();
        let mut peak: BTreeMap<NaiveDateTime, f64> = BTreeMap::new();
        for e in &events {
            let p = peak.entry(e.timestamp).or_insert(0.0);
            *p = p.max(e.magnitude);
        }
        let mags: Vec<f64> = test
            .iter()
            .map(|r| peak.get(&r.timestamp).copied().unwrap_or(0.0))
            .collect();
        let ts = TestSet {
            rows: &test,
            max_magnitude: &mags,
        };

        let mut modes = vec![detect_on_targets(&history, ts, &signals, strategy, grouping)?];
        if cfg.stages.detect_on_predictions {
            let models = signals
                .iter()
                .map(|&s| {
                    let p = l.input(Stage::Train, &format!("{n}_{s}.json"))?;
                    let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                    Ok((s, TrainedModel::from_json(&text)?))
                })
                .collect::<Result<Vec<(TargetSignal, TrainedModel)>>>()?;
            let refs: Vec<(TargetSignal, &TrainedModel)> = models.iter().map(|(s, m)| (*s, m)).collect();
            modes.push(detect_on_predictions(&history, ts, &refs, strategy, grouping)?);
        }
        for m in &modes {
            for (s, band) in &m.bands {
                write_bands(l.output(&format!("{n}_bands_{}_{s}.csv", m.mode)), band)?;
            }
        }
        let labels: Vec<LabelRow> = test
            .iter()
            .enumerate()
            .map(|(i, r)| LabelRow {
                timestamp: r.timestamp,
                truth: r.label,
                max_magnitude: mags[i],
                target: modes[0].labels[i],
                prediction: modes.get(1).map(|m| m.labels[i]),
            })
            .collect();
        write_csv(l.output(&format!("{n}_labels.csv")), &labels)?;
        let report = DetectionReport {
            system: n.clone(),
            history_days: history
                .iter()
                .map(|r| r.timestamp.date())
                .collect::<BTreeSet<_>>()
                .len(),
            test_days: held.len(),
            test_points: test.len(),
            faulty_points: test.iter().filter(|r| r.label != 0).count(),
            modes,
        };
        write_json(l.output(&format!("{n}_detection.json")), &report)?;
    }
    Ok(())
}

// ---- report ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MonthlyLoss {
    month: String,
    days: usize,
    soiling: f64,
    degradation: f64,
    dc_wiring: f64,
    ac_wiring: f64,
    inverter: f64,
    total: f64,
}

fn monthly_losses(days: &[DailyLoss]) -> Vec<MonthlyLoss> {
    let mut by: BTreeMap<String, Vec<&DailyLoss>> = BTreeMap::new();
    for d in days {
        by.entry(d.date.format("%Y-%m").to_string()).or_default().push(d);
    }
    by.into_iter()
        .map(|(month, v)| {
            let mean = |f: fn(&DailyLoss) -> f64| v.iter().map(|d| f(d)).sum::<f64>() / v.len() as f64;
            MonthlyLoss {
                month,
                days: v.len(),
                soiling: mean(|d| d.soiling),
                degradation: mean(|d| d.degradation),
                dc_wiring: mean(|d| d.dc_wiring),
                ac_wiring: mean(|d| d.ac_wiring),
                inverter: mean(|d| d.inverter),
                total: mean(|d| d.total),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SystemSummary {
    system: String,
    validation: BTreeMap<String, MetricSummary>,
    mean_total_loss: Option<f64>,
    soiling_ratio: Option<f64>,
    final_val_loss: BTreeMap<String, f64>,
    detection: Vec<ModeSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModeSummary {
    mode: String,
    accuracy: f64,
    recall: Option<f64>,
    precision: Option<f64>,
    major_recall: Option<f64>,
    per_signal: BTreeMap<String, f64>,
}

fn pct(x: Option<f64>) -> String {
    x.map_or("n/a".into(), |v| format!("{:.1}%", 100.0 * v))
}

pub(super) fn report(cfg: &RunConfig, l: &mut Ledger<'_>) -> Result<()> {
    let mut out = Vec::new();
    for sys in specs(cfg)? {
        let n = &sys.name;
        let validation: BTreeMap<String, MetricSummary> =
            read_json(l.input(Stage::Simulate, &format!("{n}_validation.json"))?)?;
        let daily: Vec<DailyLoss> = read_csv(l.input(Stage::Losses, &format!("{n}_daily.csv"))?)?;
        let soiling: Option<SoilingSummary> = read_json(l.input(Stage::Losses, &format!("{n}_soiling.json"))?)?;
        write_csv(l.output(&format!("{n}_monthly_losses.csv")), &monthly_losses(&daily))?;

        let mut final_val_loss = BTreeMap::new();
        for t in cfg.targets()? {
            let h: Vec<EpochRecord> = read_csv(l.input(Stage::Train, &format!("{n}_{t}_history.csv"))?)?;
            if let Some(v) = h.iter().map(|e| e.val_loss).reduce(f64::min) {
                final_val_loss.insert(t.name().to_string(), v);
            }
        }
        let det: DetectionReport = read_json(l.input(Stage::Detect, &format!("{n}_detection.json"))?)?;
        let detection = det
            .modes
            .iter()
            .map(|m| ModeSummary {
                mode: m.mode.to_string(),
                accuracy: m.fused.accuracy,
                recall: m.fused.recall,
                precision: m.fused.precision,
                major_recall: m.major_recall,
                per_signal: m.signals.iter().map(|s| (s.signal.clone(), s.accuracy)).collect(),
            })
            .collect();
        out.push(SystemSummary {
            system: n.clone(),
            validation,
            mean_total_loss: (!daily.is_empty())
                .then(|| daily.iter().map(|d| d.total).sum::<f64>() / daily.len() as f64),
            soiling_ratio: soiling.map(|s| s.r_s_h),
            final_val_loss,
            detection,
        });
    }
    write_json(l.output("summary.json"), &out)?;

    let mut md = String::from("# Run summary\n");
    for s in &out {
        let _ = writeln!(md, "\n## System {}\n", s.system);
        let _ = writeln!(md, "| signal | MeAPE | R² |\n|---|---|---|");
        for (k, m) in &s.validation {
            let _ = writeln!(
                md,
                "| {k} | {} | {} |",
                m.meape.map_or("n/a".into(), |v| format!("{v:.2}%")),
                m.r2.map_or("n/a".into(), |v| format!("{v:.3}"))
            );
        }
        if let Some(t) = s.mean_total_loss {
            let _ = writeln!(md, "\nMean daily total loss: {t:.2}%");
        }
        if let Some(r) = s.soiling_ratio {
            let _ = writeln!(md, "Insolation-weighted soiling ratio: {r:.4}");
        }
        let _ = writeln!(
            md,
            "\n| detection | accuracy | recall | recall (≥50% faults) |\n|---|---|---|---|"
        );
        for d in &s.detection {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} |",
                d.mode,
                pct(Some(d.accuracy)),
                pct(d.recall),
                pct(d.major_recall)
            );
        }
    }
    std::fs::write(l.output("summary.md"), md).map_err(|e| Error::io("summary.md", e))?;
    Ok(())
}
