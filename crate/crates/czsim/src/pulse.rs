//! Pulse envelopes, multi-channel schedules, sampling, and the flux-line
//! distortion model with its corrective inverse.
//!
//! Flux (Z) segments are bias *excursions* in volts added on top of the
//! channel's idle bias; microwave (XY) segments carry a complex envelope.
//! Virtual-Z gates are zero-duration frame rotations and never appear in the
//! sampled waveforms.

use crate::error::{Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Control channels of the device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    ZQ1,
    ZC,
    ZQ2,
    XyQ1,
    XyQ2,
}

impl Channel {
    pub const ALL: [Channel; 5] = [
        Channel::ZQ1,
        Channel::ZC,
        Channel::ZQ2,
        Channel::XyQ1,
        Channel::XyQ2,
    ];

    pub fn index(self) -> usize {
        match self {
            Channel::ZQ1 => 0,
            Channel::ZC => 1,
            Channel::ZQ2 => 2,
            Channel::XyQ1 => 3,
            Channel::XyQ2 => 4,
        }
    }

    pub fn is_flux(self) -> bool {
        matches!(self, Channel::ZQ1 | Channel::ZC | Channel::ZQ2)
    }
}

/// Envelope families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    /// `e(t) = A·(1 − cos(2πt/T))/2`: zero at both ends, peak A at T/2.
    HalfCosine,
    /// Flat top with optional cosine ramps of width `rise` on each edge.
    Square { rise: f64 },
    /// Constant value A over the full duration.
    Constant,
    /// Zero-duration software frame rotation (phase field holds the angle).
    VirtualZ,
}

/// One pulse on one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub channel: Channel,
    pub shape: Shape,
    /// Volts for Z channels; rad/ns Rabi rate for XY channels.
    pub amplitude: f64,
    /// ns; zero for virtual-Z.
    pub duration: f64,
    /// Radians; XY carrier phase or virtual-Z rotation angle.
    pub phase: f64,
    /// rad/ns; XY only.
    pub drive_frequency: f64,
}

impl PulseSegment {
    /// Envelope value at time `t` past segment start; zero outside
    /// `[0, duration)` so back-to-back segments never double-count.
    pub fn envelope(&self, t: f64) -> f64 {
        if t < 0.0 || t >= self.duration {
            return 0.0;
        }
        match self.shape {
            Shape::HalfCosine => self.amplitude * (1.0 - (2.0 * PI * t / self.duration).cos()) / 2.0,
            Shape::Square { rise } => {
                let e = if rise <= 0.0 {
                    1.0
                } else if t < rise {
                    (1.0 - (PI * t / rise).cos()) / 2.0
                } else if t > self.duration - rise {
                    (1.0 - (PI * (self.duration - t) / rise).cos()) / 2.0
                } else {
                    1.0
                };
                self.amplitude * e
            }
            Shape::Constant => self.amplitude,
            Shape::VirtualZ => 0.0,
        }
    }
}

/// Half-period cosine flux excursion: zero at both endpoints, peak
/// `amplitude` at the midpoint.
pub fn half_cosine_segment(channel: Channel, amplitude: f64, duration: f64) -> Result<PulseSegment> {
    if !(duration > 0.0) {
        return Err(Error::InvalidShape(format!(
            "half-cosine needs duration > 0, got {duration}"
        )));
    }
    Ok(PulseSegment {
        channel,
        shape: Shape::HalfCosine,
        amplitude,
        duration,
        phase: 0.0,
        drive_frequency: 0.0,
    })
}

/// Flat-top pulse with cosine ramps of width `rise`; `rise = 0` gives an
/// ideal square.
pub fn square_segment(
    channel: Channel,
    amplitude: f64,
    duration: f64,
    rise: f64,
) -> Result<PulseSegment> {
    if !(duration > 0.0) || rise < 0.0 || 2.0 * rise > duration {
        return Err(Error::InvalidShape(format!(
            "square needs 0 ≤ 2·rise ≤ duration, got rise {rise}, duration {duration}"
        )));
    }
    Ok(PulseSegment {
        channel,
        shape: Shape::Square { rise },
        amplitude,
        duration,
        phase: 0.0,
        drive_frequency: 0.0,
    })
}

/// Constant-value segment (e.g. re-parking a qubit for a chevron).
pub fn constant_segment(channel: Channel, amplitude: f64, duration: f64) -> Result<PulseSegment> {
    if !(duration > 0.0) {
        return Err(Error::InvalidShape(format!(
            "constant needs duration > 0, got {duration}"
        )));
    }
    Ok(PulseSegment {
        channel,
        shape: Shape::Constant,
        amplitude,
        duration,
        phase: 0.0,
        drive_frequency: 0.0,
    })
}

/// Zero-duration virtual-Z frame rotation.
pub fn virtual_z_segment(channel: Channel, phase: f64) -> PulseSegment {
    PulseSegment {
        channel,
        shape: Shape::VirtualZ,
        amplitude: 0.0,
        duration: 0.0,
        phase,
        drive_frequency: 0.0,
    }
}

/// Time-aligned per-channel pulse lists with explicit start times.
///
/// Flux channels carry an idle bias that fills gaps between segments;
/// segment envelopes add to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// (start time, segment) per channel, kept sorted by start.
    segments: Vec<(f64, PulseSegment)>,
    /// Idle value per channel (volts for Z, 0 for XY), indexed by `Channel`.
    pub idle: [f64; 5],
    /// Total duration; at least the latest segment end.
    duration: f64,
}

impl Schedule {
    pub fn new(idle: [f64; 5]) -> Self {
        Schedule {
            segments: Vec::new(),
            idle,
            duration: 0.0,
        }
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn segments(&self) -> &[(f64, PulseSegment)] {
        &self.segments
    }

    /// Extend the total duration beyond the last segment end (idle padding).
    pub fn pad_to(&mut self, duration: f64) {
        self.duration = self.duration.max(duration);
    }

    /// Add a segment starting at `start`; rejects negative starts and
    /// overlapping segments on the same channel (virtual-Z excepted).
    pub fn add(&mut self, start: f64, segment: PulseSegment) -> Result<()> {
        if start < 0.0 {
            return Err(Error::Schedule(format!("negative start time {start}")));
        }
        let end = start + segment.duration;
        if segment.duration > 0.0 {
            for (s0, other) in &self.segments {
                if other.channel == segment.channel && other.duration > 0.0 {
                    let e0 = s0 + other.duration;
                    if start < e0 - 1e-12 && *s0 < end - 1e-12 {
                        return Err(Error::Schedule(format!(
                            "overlapping segments on {:?} at t = {start}",
                            segment.channel
                        )));
                    }
                }
            }
        }
        self.duration = self.duration.max(end);
        self.segments.push((start, segment));
        self.segments
            .sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(())
    }
}

/// Discretized controls on a uniform grid.
///
/// Sample `k` represents the interval `[k·dt, (k+1)·dt)` and is taken at the
/// interval midpoint, which keeps piecewise-constant propagation second-order
/// accurate in the envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledControl {
    pub dt: f64,
    /// Flux bias waveforms (volts), indexed [Q1, C, Q2].
    pub flux: [Vec<f64>; 3],
    /// Complex microwave envelopes, indexed [Q1, Q2].
    pub xy: [Vec<C64>; 2],
    /// Virtual-Z frame updates as (time, channel, angle), in schedule order.
    pub frame_updates: Vec<(f64, Channel, f64)>,
}

impl SampledControl {
    pub fn len(&self) -> usize {
        self.flux[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.len() as f64
    }
}

/// Discretize a schedule on a uniform grid of step `dt`.
pub fn sample_schedule(schedule: &Schedule, dt: f64) -> Result<SampledControl> {
    if !(dt > 0.0) {
        return Err(Error::Sampling(format!("dt must be positive, got {dt}")));
    }
    let n = (schedule.duration() / dt - 1e-9).ceil().max(0.0) as usize;
    let mut flux = [
        vec![schedule.idle[0]; n],
        vec![schedule.idle[1]; n],
        vec![schedule.idle[2]; n],
    ];
    let mut xy = [vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]];
    let mut frame_updates = Vec::new();
    for (start, seg) in schedule.segments() {
        if seg.shape == Shape::VirtualZ {
            frame_updates.push((*start, seg.channel, seg.phase));
            continue;
        }
        let k0 = (start / dt).floor() as usize;
        let k1 = (((start + seg.duration) / dt).ceil() as usize).min(n);
        for k in k0..k1 {
            let t = (k as f64 + 0.5) * dt - start;
            if t < 0.0 || t > seg.duration {
                continue;
            }
            let e = seg.envelope(t);
            match seg.channel {
                Channel::ZQ1 => flux[0][k] += e,
                Channel::ZC => flux[1][k] += e,
                Channel::ZQ2 => flux[2][k] += e,
                Channel::XyQ1 => xy[0][k] += C64::from_polar(e, seg.phase),
                Channel::XyQ2 => xy[1][k] += C64::from_polar(e, seg.phase),
            }
        }
    }
    Ok(SampledControl {
        dt,
        flux,
        xy,
        frame_updates,
    })
}

/// Single-pole flux-line distortion: a unit step at the instrument comes out
/// as `1 + fraction·e^{−t/time_constant}` at the device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionFilter {
    /// Overshoot fraction of the settled value (may be negative).
    pub fraction: f64,
    /// Settling time constant, ns.
    pub time_constant: f64,
}

/// Apply (`invert = false`) or exactly invert (`invert = true`) the
/// distortion model on every flux channel.
///
/// The filter acts on the deviation from each channel's first sample (the
/// idle baseline): `y[n] = x[n] + f·u[n]`, `u[n] = a·u[n−1] + x[n] − x[n−1]`
/// with `a = e^{−dt/τ}`. The inverse solves the same recursion for `x` and
/// satisfies `invert(apply(x)) = x` to machine precision.
pub fn distortion_model(
    samples: &SampledControl,
    filter: DistortionFilter,
    invert: bool,
) -> Result<SampledControl> {
    if !(filter.time_constant > 0.0) {
        return Err(Error::InvalidShape(format!(
            "distortion time constant must be positive, got {}",
            filter.time_constant
        )));
    }
    if filter.fraction <= -1.0 {
        return Err(Error::UnstableFilter(filter.fraction));
    }
    let a = (-samples.dt / filter.time_constant).exp();
    let f = filter.fraction;
    let mut out = samples.clone();
    for ch in 0..3 {
        let x = &samples.flux[ch];
        if x.is_empty() {
            continue;
        }
        let base = x[0];
        let y = &mut out.flux[ch];
        let mut u = 0.0;
        let mut x_prev = 0.0;
        if !invert {
            for n in 0..x.len() {
                let xn = x[n] - base;
                u = a * u + xn - x_prev;
                y[n] = base + xn + f * u;
                x_prev = xn;
            }
        } else {
            for n in 0..x.len() {
                let yn = x[n] - base;
                let xn = (yn - f * (a * u - x_prev)) / (1.0 + f);
                u = a * u + xn - x_prev;
                y[n] = base + xn;
                x_prev = xn;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn quadrature(seg: &PulseSegment, n: usize) -> f64 {
        let dt = seg.duration / n as f64;
        (0..n).map(|k| seg.envelope((k as f64 + 0.5) * dt) * dt).sum()
    }

    #[test]
    fn half_cosine_shape() {
        let seg = half_cosine_segment(Channel::ZC, 0.25, 30.0).unwrap();
        assert_relative_eq!(seg.envelope(0.0), 0.0);
        assert_relative_eq!(seg.envelope(30.0), 0.0, epsilon = 1e-12);
        assert_relative_eq!(seg.envelope(15.0), 0.25, max_relative = 1e-12);
        // Analytic integral A·T/2 vs quadrature.
        assert_relative_eq!(quadrature(&seg, 30_000), 0.25 * 30.0 / 2.0, max_relative = 1e-6);
        assert!(half_cosine_segment(Channel::ZC, 0.1, 0.0).is_err());
    }

    #[test]
    fn square_shape() {
        // rise = 0: ideal square.
        let sq = square_segment(Channel::ZC, 0.173, 18.0, 0.0).unwrap();
        for t in [0.1, 5.0, 17.9] {
            assert_relative_eq!(sq.envelope(t), 0.173);
        }
        // Zero amplitude: identically zero.
        let z = square_segment(Channel::ZC, 0.0, 18.0, 2.0).unwrap();
        assert!((0..180).all(|k| z.envelope(k as f64 * 0.1) == 0.0));
        // Area with cosine ramps of width r is A·(T − r).
        let r = square_segment(Channel::ZC, 0.8, 20.0, 3.0).unwrap();
        assert_relative_eq!(quadrature(&r, 40_000), 0.8 * (20.0 - 3.0), max_relative = 1e-6);
        // Overlong rise rejected.
        assert!(matches!(
            square_segment(Channel::ZC, 0.1, 10.0, 6.0),
            Err(Error::InvalidShape(_))
        ));
    }

    proptest! {
        /// Envelopes are bounded by |amplitude|; half-cosine is symmetric
        /// about its midpoint.
        #[test]
        fn envelope_bounds(amp in -1.0f64..1.0, dur in 1.0f64..100.0, frac in 0.0f64..1.0) {
            let seg = half_cosine_segment(Channel::ZC, amp, dur).unwrap();
            let t = frac * dur;
            prop_assert!(seg.envelope(t).abs() <= amp.abs() + 1e-12);
            prop_assert!((seg.envelope(t) - seg.envelope(dur - t)).abs() < 1e-9 * amp.abs().max(1e-3));
            let sq = square_segment(Channel::ZC, amp, dur, 0.25 * dur).unwrap();
            prop_assert!(sq.envelope(t).abs() <= amp.abs() + 1e-12);
        }
    }

    #[test]
    fn empty_schedule_samples_idle() {
        let idle = [0.1369, 0.0, 0.0422, 0.0, 0.0];
        let mut sched = Schedule::new(idle);
        sched.pad_to(10.0);
        let s = sample_schedule(&sched, 1.0).unwrap();
        assert_eq!(s.len(), 10);
        for ch in 0..3 {
            assert!(s.flux[ch].iter().all(|&v| v == idle[ch]));
        }
        assert!(s.xy.iter().all(|c| c.iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn sampling_matches_analytic_envelope() {
        let mut sched = Schedule::new([0.0; 5]);
        let seg = half_cosine_segment(Channel::ZC, 0.25, 30.0).unwrap();
        sched.add(0.0, seg.clone()).unwrap();
        let s = sample_schedule(&sched, 0.1).unwrap();
        assert_eq!(s.len(), 300);
        for k in 0..300 {
            let t = (k as f64 + 0.5) * 0.1;
            assert_relative_eq!(s.flux[1][k], seg.envelope(t), epsilon = 1e-12);
        }
    }

    #[test]
    fn sequential_segments_concatenate() {
        let a = constant_segment(Channel::ZC, 0.1, 5.0).unwrap();
        let b = constant_segment(Channel::ZC, -0.2, 5.0).unwrap();
        let mut sched = Schedule::new([0.0; 5]);
        sched.add(0.0, a.clone()).unwrap();
        sched.add(5.0, b.clone()).unwrap();
        let joint = sample_schedule(&sched, 0.5).unwrap();

        let mut only_a = Schedule::new([0.0; 5]);
        only_a.add(0.0, a).unwrap();
        let mut only_b = Schedule::new([0.0; 5]);
        only_b.add(0.0, b).unwrap();
        let sa = sample_schedule(&only_a, 0.5).unwrap();
        let sb = sample_schedule(&only_b, 0.5).unwrap();
        let concat: Vec<f64> = sa.flux[1].iter().chain(sb.flux[1].iter()).copied().collect();
        assert_eq!(joint.flux[1], concat);
    }

    #[test]
    fn overlap_rejected() {
        let mut sched = Schedule::new([0.0; 5]);
        sched
            .add(0.0, constant_segment(Channel::ZC, 0.1, 10.0).unwrap())
            .unwrap();
        let err = sched.add(5.0, constant_segment(Channel::ZC, 0.2, 10.0).unwrap());
        assert!(matches!(err, Err(Error::Schedule(_))));
        // Different channel at the same time is fine.
        sched
            .add(5.0, constant_segment(Channel::ZQ2, 0.2, 10.0).unwrap())
            .unwrap();
    }

    #[test]
    fn virtual_z_reported_as_frame_update() {
        let mut sched = Schedule::new([0.0; 5]);
        sched.pad_to(4.0);
        sched.add(2.0, virtual_z_segment(Channel::ZQ2, 1.234)).unwrap();
        let s = sample_schedule(&sched, 1.0).unwrap();
        assert!(s.flux[2].iter().all(|&v| v == 0.0));
        assert_eq!(s.frame_updates, vec![(2.0, Channel::ZQ2, 1.234)]);
    }

    fn step_samples(n: usize, dt: f64) -> SampledControl {
        SampledControl {
            dt,
            flux: [vec![0.0; n], (0..n).map(|_| 1.0).collect(), vec![0.0; n]],
            xy: [vec![], vec![]],
            frame_updates: vec![],
        }
    }

    #[test]
    fn distortion_step_response() {
        // fraction = 0 → identity.
        let s = step_samples(200, 1.0);
        let id = distortion_model(
            &s,
            DistortionFilter {
                fraction: 0.0,
                time_constant: 30.0,
            },
            false,
        )
        .unwrap();
        assert_eq!(id.flux, s.flux);

        // Step with overshoot 0.1, τ_f = 30 ns: first sample ≈ 1.1, then
        // decays toward 1.
        // (The baseline is the first sample, so feed a 0 → 1 step.)
        let mut stepped = step_samples(400, 1.0);
        stepped.flux[1][0] = 0.0;
        let out = distortion_model(
            &stepped,
            DistortionFilter {
                fraction: 0.1,
                time_constant: 30.0,
            },
            false,
        )
        .unwrap();
        assert_relative_eq!(out.flux[1][1], 1.1, max_relative = 1e-12);
        assert!(out.flux[1][50] < out.flux[1][1]);
        assert_relative_eq!(out.flux[1][399], 1.0, max_relative = 1e-4);

        // Unstable inverse rejected.
        assert!(matches!(
            distortion_model(
                &s,
                DistortionFilter {
                    fraction: -1.0,
                    time_constant: 30.0
                },
                true
            ),
            Err(Error::UnstableFilter(_))
        ));
    }

    #[test]
    fn distortion_round_trip() {
        // invert(apply(x)) = x on a random-ish waveform.
        let n = 500;
        let mut s = step_samples(n, 0.5);
        for k in 0..n {
            let t = k as f64 * 0.5;
            s.flux[1][k] = 0.3 * (0.11 * t).sin() + 0.05 * (0.73 * t).cos() - 0.05;
            s.flux[0][k] = 0.2 * (0.05 * t).sin();
        }
        let filt = DistortionFilter {
            fraction: -0.15,
            time_constant: 12.0,
        };
        let applied = distortion_model(&s, filt, false).unwrap();
        let back = distortion_model(&applied, filt, true).unwrap();
        for ch in 0..3 {
            for k in 0..n {
                assert!((back.flux[ch][k] - s.flux[ch][k]).abs() < 1e-10);
            }
        }
    }
}
