//! Clock-driven simulation of a network instance and the firing-rate
//! metrics derived from its spike record.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SnnError;
use crate::network::{thalamic_input, NetworkGenome, NetworkInstance};
use crate::neuron::{detect_and_reset, integrate_tick, NeuronState, Population};
use crate::seed::stream;

/// Default simulated duration: one second of 1 ms ticks.
pub const DEFAULT_DURATION: usize = 1000;

/// At most this many neurons can carry a membrane probe.
pub const MAX_PROBES: usize = 10;

const STREAM_NOISE: u64 = 0;

/// Neurons per parallel work item within a tick.
const CHUNK: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpikeEvent {
    pub tick: usize,
    pub neuron: usize,
}

/// Spikes of one simulation, sorted by `(tick, neuron)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpikeRecord {
    pub events: Vec<SpikeEvent>,
    pub duration: usize,
    pub n_exc: usize,
    pub n_inh: usize,
}

impl SpikeRecord {
    pub fn empty(n_exc: usize, n_inh: usize, duration: usize) -> Self {
        Self {
            events: Vec::new(),
            duration,
            n_exc,
            n_inh,
        }
    }

    pub fn n_neurons(&self) -> usize {
        self.n_exc + self.n_inh
    }

    pub fn population(&self, neuron: usize) -> Population {
        if neuron < self.n_exc {
            Population::Excitatory
        } else {
            Population::Inhibitory
        }
    }

    /// Checks the ordering and range invariants.
    pub fn validate(&self) -> Result<(), SnnError> {
        let n = self.n_neurons();
        for e in &self.events {
            if e.tick >= self.duration || e.neuron >= n {
                return Err(SnnError::Domain(format!(
                    "event {e:?} outside {} ticks x {n} neurons",
                    self.duration
                )));
            }
        }
        if self.events.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SnnError::Domain("spike events not strictly sorted".into()));
        }
        Ok(())
    }

    /// Appends `other` shifted to start after this record ends.
    pub fn concat(&self, other: &SpikeRecord) -> Result<SpikeRecord, SnnError> {
        if (self.n_exc, self.n_inh) != (other.n_exc, other.n_inh) {
            return Err(SnnError::Domain("records cover different populations".into()));
        }
        let mut events = self.events.clone();
        events.extend(other.events.iter().map(|e| SpikeEvent {
            tick: e.tick + self.duration,
            neuron: e.neuron,
        }));
        Ok(SpikeRecord {
            events,
            duration: self.duration + other.duration,
            n_exc: self.n_exc,
            n_inh: self.n_inh,
        })
    }
}

/// Population- and time-averaged rates in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub r_exc: f64,
    pub r_inh: f64,
    pub r_all: f64,
}

/// Per-bin population rates in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSeries {
    pub bin: usize,
    pub bin_starts: Vec<usize>,
    pub r_exc: Vec<f64>,
    pub r_inh: Vec<f64>,
    pub r_all: Vec<f64>,
}

impl RateSeries {
    pub fn len(&self) -> usize {
        self.bin_starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bin_starts.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    /// Draw thalamic noise. Only unit tests switch this off.
    pub noise: bool,
    /// Split neuron updates within a tick across the rayon pool.
    pub parallel: bool,
    /// Neurons whose membrane potential is recorded every tick.
    pub probes: Vec<usize>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            noise: true,
            parallel: false,
            probes: Vec::new(),
        }
    }
}

/// Membrane trace of one probed neuron: `v` at the end of every tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub neuron: usize,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub record: SpikeRecord,
    pub probes: Vec<Probe>,
}

/// Simulates `duration` ticks with thalamic noise drawn from `noise_seed`.
pub fn run_simulation(
    instance: &NetworkInstance,
    genome: &NetworkGenome,
    duration: usize,
    noise_seed: u64,
) -> Result<SpikeRecord, SnnError> {
    run_simulation_with(instance, genome, duration, noise_seed, &SimOptions::default())
        .map(|out| out.record)
}

/// [`run_simulation`] with explicit options.
///
/// Each tick first resets every neuron that reached the peak, then forms
/// its input from thalamic drive plus the pulses of this tick's spikers and
/// finally integrates. The noise vector for a tick is drawn in neuron order
/// before any parallel work, and the recurrent sum for each neuron adds
/// columns in spiker order, so results do not depend on the thread count.
pub fn run_simulation_with(
    instance: &NetworkInstance,
    genome: &NetworkGenome,
    duration: usize,
    noise_seed: u64,
    options: &SimOptions,
) -> Result<SimOutput, SnnError> {
    genome.validate()?;
    let n = instance.len();
    if duration == 0 {
        return Err(SnnError::Domain("duration must be at least one tick".into()));
    }
    if n == 0 || instance.params.len() != n || instance.weights.size() != n {
        return Err(SnnError::Domain("inconsistent network instance".into()));
    }
    if options.probes.len() > MAX_PROBES {
        return Err(SnnError::Config(format!("at most {MAX_PROBES} probes allowed")));
    }
    if let Some(&p) = options.probes.iter().find(|&&p| p >= n) {
        return Err(SnnError::Config(format!("probe neuron {p} out of range")));
    }

    let mu: Vec<f64> = [Population::Excitatory, Population::Inhibitory]
        .iter()
        .map(|&p| genome.thalamic_mean(p))
        .collect();
    let pops: Vec<Population> = (0..n).map(|i| instance.population(i)).collect();

    let mut states: Vec<NeuronState> = instance.params.iter().map(NeuronState::resting).collect();
    let mut noise_rng = stream(noise_seed, STREAM_NOISE);
    let mut current = vec![0.0f64; n];
    let mut fired: Vec<usize> = Vec::new();
    let mut events = Vec::new();
    let mut probes: Vec<Probe> = options
        .probes
        .iter()
        .map(|&neuron| Probe {
            neuron,
            v: Vec::with_capacity(duration),
        })
        .collect();

    for tick in 0..duration {
        fired.clear();
        for (i, (s, p)) in states.iter_mut().zip(&instance.params).enumerate() {
            let (next, spiked) = detect_and_reset(*s, p);
            *s = next;
            if spiked {
                fired.push(i);
            }
        }
        events.extend(fired.iter().map(|&neuron| SpikeEvent { tick, neuron }));

        for (i, c) in current.iter_mut().enumerate() {
            let z: f64 = if options.noise {
                noise_rng.sample(StandardNormal)
            } else {
                0.0
            };
            let pop = pops[i];
            let m = if pop == Population::Excitatory { mu[0] } else { mu[1] };
            *c = thalamic_input(pop, m, z);
        }

        let step = |offset: usize, cur: &mut [f64], st: &mut [NeuronState]| -> Result<(), SnnError> {
            let len = cur.len();
            for &pre in &fired {
                let col = &instance.weights.column(pre)[offset..offset + len];
                for (c, w) in cur.iter_mut().zip(col) {
                    *c += w;
                }
            }
            for (k, (s, c)) in st.iter_mut().zip(cur.iter()).enumerate() {
                let neuron = offset + k;
                *s = integrate_tick(*s, &instance.params[neuron], *c).map_err(|d| SnnError::Diverged {
                    neuron,
                    tick,
                    v: d.v,
                    w: d.w,
                })?;
            }
            Ok(())
        };

        if options.parallel {
            current
                .par_chunks_mut(CHUNK)
                .zip(states.par_chunks_mut(CHUNK))
                .enumerate()
                .map(|(k, (cur, st))| step(k * CHUNK, cur, st))
                .collect::<Vec<_>>()
                .into_iter()
                .collect::<Result<(), _>>()?;
        } else {
            step(0, &mut current, &mut states)?;
        }

        for probe in &mut probes {
            probe.v.push(states[probe.neuron].v);
        }
    }

    Ok(SimOutput {
        record: SpikeRecord {
            events,
            duration,
            n_exc: instance.n_exc,
            n_inh: instance.n_inh,
        },
        probes,
    })
}

/// `count` spikes from `size` neurons over `ticks` ms, in Hz.
fn rate(count: usize, size: usize, ticks: usize) -> f64 {
    if size == 0 || ticks == 0 {
        return 0.0;
    }
    count as f64 * 1000.0 / (size as f64 * ticks as f64)
}

fn population_counts(record: &SpikeRecord, events: &[SpikeEvent]) -> (usize, usize) {
    let exc = events.iter().filter(|e| e.neuron < record.n_exc).count();
    (exc, events.len() - exc)
}

/// Spike counts per population over the whole record, as rates.
pub fn mean_rates(record: &SpikeRecord) -> RateSummary {
    let (exc, inh) = population_counts(record, &record.events);
    RateSummary {
        r_exc: rate(exc, record.n_exc, record.duration),
        r_inh: rate(inh, record.n_inh, record.duration),
        r_all: rate(exc + inh, record.n_neurons(), record.duration),
    }
}

/// Rates in consecutive bins of `bin` ticks. A final partial bin is
/// normalized by its actual width.
pub fn instantaneous_rates(record: &SpikeRecord, bin: usize) -> Result<RateSeries, SnnError> {
    if bin == 0 {
        return Err(SnnError::Domain("bin width must be at least one tick".into()));
    }
    let n_bins = record.duration.div_ceil(bin);
    let mut exc = vec![0usize; n_bins];
    let mut inh = vec![0usize; n_bins];
    for e in &record.events {
        let b = e.tick / bin;
        if e.neuron < record.n_exc {
            exc[b] += 1;
        } else {
            inh[b] += 1;
        }
    }
    let mut series = RateSeries {
        bin,
        bin_starts: Vec::with_capacity(n_bins),
        r_exc: Vec::with_capacity(n_bins),
        r_inh: Vec::with_capacity(n_bins),
        r_all: Vec::with_capacity(n_bins),
    };
    for b in 0..n_bins {
        let start = b * bin;
        let width = bin.min(record.duration - start);
        series.bin_starts.push(start);
        series.r_exc.push(rate(exc[b], record.n_exc, width));
        series.r_inh.push(rate(inh[b], record.n_inh, width));
        series.r_all.push(rate(exc[b] + inh[b], record.n_neurons(), width));
    }
    Ok(series)
}

/// Writes `tick,neuron,population` rows.
pub fn export_raster(record: &SpikeRecord, path: &Path) -> Result<(), SnnError> {
    let file = File::create(path).map_err(|e| SnnError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "tick,neuron,population")?;
        for e in &record.events {
            writeln!(out, "{},{},{}", e.tick, e.neuron, record.population(e.neuron).label())?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| SnnError::io(path, e))
}

/// Reads a raster written by [`export_raster`]. The file does not carry the
/// population sizes or the duration, so they are supplied by the caller.
pub fn import_raster(path: &Path, n_exc: usize, n_inh: usize, duration: usize) -> Result<SpikeRecord, SnnError> {
    let file = File::open(path).map_err(|e| SnnError::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "tick,neuron,population" => {}
        Some(Err(e)) => return Err(SnnError::io(path, e)),
        _ => return Err(SnnError::parse(path, 1, "missing raster header")),
    }
    let mut events = Vec::new();
    for (k, line) in lines.enumerate() {
        let line_no = k + 2;
        let line = line.map_err(|e| SnnError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 3 {
            return Err(SnnError::parse(path, line_no, "expected 3 fields"));
        }
        let tick = fields[0]
            .parse()
            .map_err(|_| SnnError::parse(path, line_no, format!("bad tick {:?}", fields[0])))?;
        let neuron: usize = fields[1]
            .parse()
            .map_err(|_| SnnError::parse(path, line_no, format!("bad neuron {:?}", fields[1])))?;
        let expected = if neuron < n_exc { "exc" } else { "inh" };
        if fields[2] != expected {
            return Err(SnnError::parse(
                path,
                line_no,
                format!("neuron {neuron} labelled {} but belongs to {expected}", fields[2]),
            ));
        }
        events.push(SpikeEvent { tick, neuron });
    }
    let record = SpikeRecord {
        events,
        duration,
        n_exc,
        n_inh,
    };
    record.validate()?;
    Ok(record)
}

/// Writes `bin_start_ms,r_exc,r_inh,r_all` rows.
pub fn export_rate_series(series: &RateSeries, path: &Path) -> Result<(), SnnError> {
    let mut text = String::from("bin_start_ms,r_exc,r_inh,r_all\n");
    for k in 0..series.len() {
        let _ = writeln!(
            text,
            "{},{},{},{}",
            series.bin_starts[k], series.r_exc[k], series.r_inh[k], series.r_all[k]
        );
    }
    fs::write(path, text).map_err(|e| SnnError::io(path, e))
}

/// Two stacked panels: spike raster on top (excitatory blue, inhibitory
/// red) and the 1 ms population rate below.
pub fn render_raster_svg(record: &SpikeRecord, path: &Path) -> Result<(), SnnError> {
    let (w, left, right) = (900.0, 60.0, 20.0);
    let (top_h, bottom_h, gap, top) = (360.0, 160.0, 50.0, 20.0);
    let plot_w = w - left - right;
    let h = top + top_h + gap + bottom_h + 40.0;
    let dur = record.duration.max(1) as f64;
    let n = record.n_neurons().max(1) as f64;
    let series = instantaneous_rates(record, 1)?;
    let max_rate = series.r_all.iter().copied().fold(0.0, f64::max).max(1.0);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{plot_w}" height="{top_h}" fill="none" stroke="black"/>"#
    );
    for e in &record.events {
        let x = left + (e.tick as f64 + 0.5) / dur * plot_w;
        let y = top + top_h - (e.neuron as f64 + 0.5) / n * top_h;
        let color = match record.population(e.neuron) {
            Population::Excitatory => "#1f4fd1",
            Population::Inhibitory => "#d1261f",
        };
        let _ = writeln!(svg, r#"<circle class="spike" cx="{x:.2}" cy="{y:.2}" r="0.8" fill="{color}"/>"#);
    }
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">neuron</text>"#,
        top + top_h / 2.0,
        top + top_h / 2.0
    );

    let y0 = top + top_h + gap;
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{y0}" width="{plot_w}" height="{bottom_h}" fill="none" stroke="black"/>"#
    );
    let mut points = String::new();
    for (k, r) in series.r_all.iter().enumerate() {
        let x = left + (k as f64 + 0.5) / dur * plot_w;
        let y = y0 + bottom_h - r / max_rate * bottom_h;
        let _ = write!(points, "{x:.2},{y:.2} ");
    }
    let _ = writeln!(
        svg,
        r#"<polyline class="rate" fill="none" stroke="black" stroke-width="0.8" points="{}"/>"#,
        points.trim_end()
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">rate (Hz)</text>"#,
        y0 + bottom_h / 2.0,
        y0 + bottom_h / 2.0
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}">{max_rate:.0}</text>"#, left - 40.0, y0 + 10.0);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">time (ms)</text>"#,
        left + plot_w / 2.0,
        y0 + bottom_h + 30.0
    );
    let _ = writeln!(svg, r#"<text x="{left}" y="{}">0</text>"#, y0 + bottom_h + 15.0);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        left + plot_w,
        y0 + bottom_h + 15.0,
        record.duration
    );
    svg.push_str("</svg>\n");
    fs::write(path, svg).map_err(|e| SnnError::io(path, e))
}
