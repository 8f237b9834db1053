use chrono::{Datelike, NaiveDate, NaiveDateTime};
use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::spec::{FaultSpec, Signal};
use crate::error::{Error, Result};
use crate::pv::{snl_ac_power, InverterParams};
use crate::rng::substream;
use crate::series::slot_time;
use crate::simulate::ProductionSample;
use crate::synth::SynthDay;

/// Upper bound on the fraction of a day's eligible samples carrying any fault.
pub const MAX_FAULT_FRACTION: f64 = 0.5;

/// One fault occurrence at one timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultEvent {
    pub timestamp: NaiveDateTime,
    /// Index into the spec list the schedule was generated from.
    pub fault: usize,
    pub name: String,
    /// Percent, one per target of the spec.
    pub magnitudes: Vec<f64>,
}

impl FaultEvent {
    pub fn is_active(&self) -> bool {
        self.magnitudes.iter().any(|&m| m > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSchedule {
    pub date: NaiveDate,
    /// Samples the faults could land on (daylight).
    pub eligible: usize,
    /// Sorted by timestamp, then fault index.
    pub events: Vec<FaultEvent>,
}

impl FaultSchedule {
    pub fn empty(date: NaiveDate) -> Self {
        FaultSchedule {
            date,
            eligible: 0,
            events: Vec::new(),
        }
    }

    /// Distinct timestamps with at least one non-zero magnitude.
    pub fn faulty_timestamps(&self) -> Vec<NaiveDateTime> {
        let mut ts: Vec<_> = self
            .events
            .iter()
            .filter(|e| e.is_active())
            .map(|e| e.timestamp)
            .collect();
        ts.dedup();
        ts
    }
}

/// Draws one day of faults.
///
/// Only daylight samples (`G_POA > 0`) are eligible. A pool holding half of them
/// is drawn first; every fault then picks `round(u·n)` points from the pool with
/// `u ~ U(0, 0.5)` and `n` the eligible count, so the union of all faults never
/// exceeds half of the day while each fault's points remain uniform over the
/// daylight samples. Each point gets magnitudes `~ U(min, max)`.
pub fn generate_fault_schedule(specs: &[FaultSpec], day: &SynthDay, seed: u64) -> Result<FaultSchedule> {
    if specs.is_empty() {
        return Err(Error::input("no fault specs given"));
    }
    for s in specs {
        s.validate()?;
    }
    let mut rng = substream(seed, "fault-schedule", day.date.num_days_from_ce() as u64);
    let eligible: Vec<usize> = (0..day.g_poa.len()).filter(|&s| day.g_poa[s] > 0.0).collect();
    let n = eligible.len();
    let pool_size = (MAX_FAULT_FRACTION * n as f64).floor() as usize;
    let mut pool: Vec<usize> = sample(&mut rng, n, pool_size)
        .into_iter()
        .map(|i| eligible[i])
        .collect();
    pool.sort_unstable();

    let mut events = Vec::new();
    for (f, spec) in specs.iter().enumerate() {
        let frac = rng.random_range(0.0..=MAX_FAULT_FRACTION);
        let count = ((frac * n as f64).round() as usize).min(pool_size);
        let mut picks: Vec<usize> = sample(&mut rng, pool_size, count)
            .into_iter()
            .map(|i| pool[i])
            .collect();
        picks.sort_unstable();
        for slot in picks {
            let draws: Vec<f64> = (0..spec.draws())
                .map(|d| {
                    let t = &spec.targets[d];
                    rng.random_range(t.min..=t.max)
                })
                .collect();
            events.push(FaultEvent {
                timestamp: slot_time(day.date, slot),
                fault: f,
                name: spec.name.clone(),
                magnitudes: (0..spec.targets.len()).map(|t| draws[spec.draw_of(t)]).collect(),
            });
        }
    }
    events.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then(a.fault.cmp(&b.fault)));
    Ok(FaultSchedule {
        date: day.date,
        eligible: n,
        events,
    })
}

/// Binary fault labels aligned with a production series.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSeries {
    pub timestamps: Vec<NaiveDateTime>,
    pub labels: Vec<u8>,
}

impl LabelSeries {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }
}

/// Label 1 wherever some scheduled fault has a non-zero magnitude.
pub fn labels_from_schedules(timestamps: &[NaiveDateTime], schedules: &[FaultSchedule]) -> LabelSeries {
    let mut faulty = std::collections::BTreeSet::new();
    for s in schedules {
        faulty.extend(s.faulty_timestamps());
    }
    LabelSeries {
        timestamps: timestamps.to_vec(),
        labels: timestamps.iter().map(|t| faulty.contains(t) as u8).collect(),
    }
}

/// Faulted production plus labels and per-target magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultedSeries {
    pub samples: Vec<ProductionSample>,
    pub labels: LabelSeries,
    /// Column names of `magnitudes`, `"{fault}_{signal}"`.
    pub columns: Vec<String>,
    /// Per sample, one magnitude per column (0 when absent).
    pub magnitudes: Vec<Vec<f64>>,
}

pub fn magnitude_columns(specs: &[FaultSpec]) -> Vec<String> {
    specs
        .iter()
        .flat_map(|s| s.targets.iter().map(move |t| format!("{}_{}", s.name, t.signal)))
        .collect()
}

/// Applies scheduled faults to production.
///
/// DC-side targets are applied first, composing multiplicatively when faults
/// overlap. A derated `I_DC` or `V_DC` also derates `P_DC` so that DC power stays
/// the product of the two. When DC power or voltage changed, `P_AC` is recomputed
/// from the faulted DC side through the inverter model and `ac_wiring(date)`
/// percent; inverter faults then scale `P_AC`.
pub fn apply_faults(
    prod: &[ProductionSample],
    schedules: &[FaultSchedule],
    specs: &[FaultSpec],
    inverter: &InverterParams,
    ac_wiring: impl Fn(NaiveDate) -> f64,
) -> Result<FaultedSeries> {
    let index: BTreeMap<NaiveDateTime, usize> = prod.iter().enumerate().map(|(i, s)| (s.timestamp, i)).collect();
    let columns = magnitude_columns(specs);
    let offsets: Vec<usize> = specs
        .iter()
        .scan(0, |acc, s| {
            let o = *acc;
            *acc += s.targets.len();
            Some(o)
        })
        .collect();

    let mut factors: BTreeMap<usize, BTreeMap<Signal, f64>> = BTreeMap::new();
    let mut magnitudes = vec![vec![0.0; columns.len()]; prod.len()];
    for sched in schedules {
        for e in &sched.events {
            let Some(&i) = index.get(&e.timestamp) else {
                return Err(Error::input(format!(
                    "fault at {} has no production sample",
                    e.timestamp
                )));
            };
            let spec = specs
                .get(e.fault)
                .ok_or_else(|| Error::config(format!("fault index {} outside spec list", e.fault)))?;
            if spec.targets.len() != e.magnitudes.len() {
                return Err(Error::config(format!("fault {}: magnitude count mismatch", spec.name)));
            }
            let f = factors.entry(i).or_default();
            for (t, (target, &m)) in spec.targets.iter().zip(&e.magnitudes).enumerate() {
                *f.entry(target.signal).or_insert(1.0) *= target.factor(m);
                magnitudes[i][offsets[e.fault] + t] = m;
            }
        }
    }

    let mut samples = prod.to_vec();
    for (&i, f) in &factors {
        let get = |s: Signal| f.get(&s).copied().unwrap_or(1.0);
        let s = &mut samples[i];
        let (fi, fv) = (get(Signal::IDc), get(Signal::VDc));
        s.i_dc *= fi;
        s.v_dc *= fv;
        s.i_sc *= get(Signal::Isc);
        s.v_oc *= get(Signal::Voc);
        s.t_cell *= get(Signal::TCell);
        let fp = get(Signal::PDc) * fi * fv;
        s.p_dc *= fp;
        if fp != 1.0 || fv != 1.0 {
            let ac = ac_wiring(s.timestamp.date());
            s.p_ac = snl_ac_power(s.p_dc, s.v_dc, inverter)? * (1.0 - ac / 100.0);
        }
        s.p_ac *= get(Signal::PAc);
    }

    let ts: Vec<_> = prod.iter().map(|s| s.timestamp).collect();
    Ok(FaultedSeries {
        samples,
        labels: labels_from_schedules(&ts, schedules),
        columns,
        magnitudes,
    })
}
