//! Slot-level stack engine for one realization.
//!
//! Per slot the engine (1) enqueues constant-bit-rate packet arrivals into
//! the RLC buffer, dropping arrivals that would overflow it, (2) spends the
//! single transmission opportunity on the earliest due HARQ retransmission
//! or, if none is due, on a fresh transport block filled from the buffer
//! head, and (3) timestamps deliveries at the end of the slot. Failed blocks
//! retransmit after a fixed HARQ round trip, up to the retransmission limit;
//! exhausted payloads are re-enqueued at the buffer head once before they
//! become subject to the normal overflow rules. Buffer overflow is therefore
//! the only steady-state packet-loss mechanism.

use serde::{Deserialize, Serialize};

use rand::Rng;

use crate::link::LinkState;
use crate::{Result, SimError};

/// Configuration of the slot engine for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackConfig {
    /// RLC buffer capacity, bytes.
    pub rlc_buffer_bytes: u64,
    /// Number of HARQ processes.
    pub harq_processes: usize,
    /// Retransmissions allowed per transport block after the initial one.
    pub harq_max_retx: u32,
    /// Slots between a failed transmission and its retransmission.
    pub harq_rtt_slots: u64,
    /// Application packet size, bytes.
    pub packet_bytes: u32,
    /// Offered constant bit rate, Mbps.
    pub app_rate_mbps: f64,
    /// Simulated time per realization, seconds.
    pub run_duration_s: f64,
    /// One-way core-network delay added to every delivered packet, seconds.
    /// Excluded from the queueing dynamics.
    pub transport_delay_s: f64,
    /// Slot duration, seconds.
    pub slot_s: f64,
}

impl StackConfig {
    /// Defaults matching the shipped configuration at the given rate.
    pub fn with_rate(app_rate_mbps: f64) -> Self {
        Self {
            rlc_buffer_bytes: 10_000_000,
            harq_processes: 8,
            harq_max_retx: 3,
            harq_rtt_slots: 4,
            packet_bytes: 1400,
            app_rate_mbps,
            run_duration_s: 9.0,
            transport_delay_s: 1e-3,
            slot_s: 250e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rlc_buffer_bytes", self.rlc_buffer_bytes as f64),
            ("harq_processes", self.harq_processes as f64),
            ("packet_bytes", f64::from(self.packet_bytes)),
            ("app_rate_mbps", self.app_rate_mbps),
            ("run_duration_s", self.run_duration_s),
            ("slot_s", self.slot_s),
            ("harq_rtt_slots", self.harq_rtt_slots as f64),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(SimError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.transport_delay_s < 0.0 {
            return Err(SimError::InvalidParameter(
                "transport_delay_s must be >= 0".into(),
            ));
        }
        if u64::from(self.packet_bytes) > self.rlc_buffer_bytes {
            return Err(SimError::InvalidParameter(format!(
                "packet_bytes {} exceeds rlc_buffer_bytes {}",
                self.packet_bytes, self.rlc_buffer_bytes
            )));
        }
        Ok(())
    }

    /// Number of slots covering the run duration.
    pub fn slots(&self) -> u64 {
        ((self.run_duration_s / self.slot_s) - 1e-9).ceil().max(1.0) as u64
    }

    /// Seconds between packet arrivals of the CBR source.
    pub fn arrival_interval_s(&self) -> f64 {
        f64::from(self.packet_bytes) * 8.0 / (self.app_rate_mbps * 1e6)
    }
}

/// Aggregated outcome of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Offered load actually generated, Mbps.
    pub offered_mbps: f64,
    /// End-to-end goodput, Mbps.
    pub delivered_mbps: f64,
    /// Dropped packets as a percentage of generated packets.
    pub drop_pct: f64,
    pub mean_latency_ms: f64,
    pub p95_latency_ms: f64,
    /// SNR of the realization's link state, dB.
    pub mean_snr_db: f64,
    /// Selected MCS; `None` in outage.
    pub mcs: Option<u8>,
    pub slots_simulated: u64,
    pub packets_generated: u64,
    pub packets_delivered: u64,
    pub packets_dropped: u64,
    /// Packets still in the buffer or in flight when the run ended.
    pub packets_residual: u64,
    /// Peak RLC buffer occupancy observed, bytes.
    pub max_buffer_bytes: u64,
}

/// One per-slot trace row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotTraceRow {
    pub slot: u64,
    pub buffer_bytes: u64,
    pub tx_bytes: u64,
    pub harq_active: usize,
    pub drops: u64,
    pub deliveries: u64,
}

/// Optional per-slot trace of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SlotTrace {
    pub rows: Vec<SlotTraceRow>,
}

impl SlotTrace {
    /// Writes the trace as CSV with a fixed header.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "slot,buffer_bytes,tx_bytes,harq_active,drops,deliveries")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.slot, r.buffer_bytes, r.tx_bytes, r.harq_active, r.drops, r.deliveries
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Packet {
    gen_time_s: f64,
    bytes: u32,
    /// Set once the packet has survived a HARQ exhaustion re-enqueue.
    requeued: bool,
}

#[derive(Debug)]
struct InFlightTb {
    packets: Vec<Packet>,
    bytes: u64,
    transmissions: u32,
    due_slot: u64,
}

struct Engine<'a> {
    link: &'a LinkState,
    cfg: &'a StackConfig,
    buffer: std::collections::VecDeque<Packet>,
    buffer_bytes: u64,
    flight: Vec<Option<InFlightTb>>,
    latencies_s: Vec<f64>,
    generated: u64,
    delivered: u64,
    delivered_bytes: u64,
    dropped: u64,
    max_buffer_bytes: u64,
}

impl<'a> Engine<'a> {
    fn new(link: &'a LinkState, cfg: &'a StackConfig) -> Self {
        Self {
            link,
            cfg,
            buffer: std::collections::VecDeque::new(),
            buffer_bytes: 0,
            flight: (0..cfg.harq_processes).map(|_| None).collect(),
            latencies_s: Vec::new(),
            generated: 0,
            delivered: 0,
            delivered_bytes: 0,
            dropped: 0,
            max_buffer_bytes: 0,
        }
    }

    /// Index of the retransmission due first, ties broken by process index.
    fn due_retx(&self, slot: u64) -> Option<usize> {
        let mut pick: Option<(u64, usize)> = None;
        for (i, p) in self.flight.iter().enumerate() {
            if let Some(tb) = p {
                if tb.due_slot <= slot {
                    match pick {
                        Some((due, _)) if due <= tb.due_slot => {}
                        _ => pick = Some((tb.due_slot, i)),
                    }
                }
            }
        }
        pick.map(|(_, i)| i)
    }

    fn free_process(&self) -> Option<usize> {
        self.flight.iter().position(|p| p.is_none())
    }

    /// Pops whole packets from the buffer head until the next one no longer
    /// fits the transport block.
    fn fill_tb(&mut self) -> (Vec<Packet>, u64) {
        let mut packets = Vec::new();
        let mut bytes = 0u64;
        while let Some(front) = self.buffer.front() {
            let b = u64::from(front.bytes);
            if bytes + b > self.link.tb_bytes {
                break;
            }
            bytes += b;
            self.buffer_bytes -= b;
            packets.push(self.buffer.pop_front().expect("front checked"));
        }
        (packets, bytes)
    }

    fn deliver(&mut self, tb: InFlightTb, slot_end_s: f64) {
        for p in &tb.packets {
            self.latencies_s
                .push(slot_end_s - p.gen_time_s + self.cfg.transport_delay_s);
        }
        self.delivered += tb.packets.len() as u64;
        self.delivered_bytes += tb.bytes;
    }

    /// HARQ gave up on this block: payload goes back to the buffer head,
    /// unless a packet was already re-enqueued once or no longer fits.
    fn requeue_or_drop(&mut self, tb: InFlightTb) {
        let mut kept = Vec::with_capacity(tb.packets.len());
        for mut p in tb.packets {
            let b = u64::from(p.bytes);
            if !p.requeued && self.buffer_bytes + b <= self.cfg.rlc_buffer_bytes {
                p.requeued = true;
                self.buffer_bytes += b;
                kept.push(p);
            } else {
                self.dropped += 1;
            }
        }
        for p in kept.into_iter().rev() {
            self.buffer.push_front(p);
        }
        self.max_buffer_bytes = self.max_buffer_bytes.max(self.buffer_bytes);
    }

    fn run(mut self, rng: &mut impl Rng, mut trace: Option<&mut SlotTrace>) -> RunMetrics {
        let slots = self.cfg.slots();
        let interval = self.cfg.arrival_interval_s();
        let pkt_bytes = u64::from(self.cfg.packet_bytes);
        let mut next_pkt: u64 = 0;

        for slot in 0..slots {
            let slot_end_s = (slot + 1) as f64 * self.cfg.slot_s;
            let (drops_before, delivered_before) = (self.dropped, self.delivered);

            // (1) CBR arrivals due within this slot.
            loop {
                let t = next_pkt as f64 * interval;
                if t >= self.cfg.run_duration_s || t >= slot_end_s {
                    break;
                }
                self.generated += 1;
                next_pkt += 1;
                if self.buffer_bytes + pkt_bytes <= self.cfg.rlc_buffer_bytes {
                    self.buffer.push_back(Packet {
                        gen_time_s: t,
                        bytes: self.cfg.packet_bytes,
                        requeued: false,
                    });
                    self.buffer_bytes += pkt_bytes;
                } else {
                    self.dropped += 1;
                }
            }
            self.max_buffer_bytes = self.max_buffer_bytes.max(self.buffer_bytes);

            // (2) One transmission opportunity: due retransmissions first.
            let mut tx_bytes = 0u64;
            if let Some(i) = self.due_retx(slot) {
                let mut tb = self.flight[i].take().expect("due process is busy");
                tb.transmissions += 1;
                tx_bytes = tb.bytes;
                let failed = rng.random::<f64>() < self.link.bler;
                if !failed {
                    self.deliver(tb, slot_end_s);
                } else if tb.transmissions > self.cfg.harq_max_retx {
                    self.requeue_or_drop(tb);
                } else {
                    tb.due_slot = slot + self.cfg.harq_rtt_slots;
                    self.flight[i] = Some(tb);
                }
            } else if self.link.tb_bytes > 0 && !self.buffer.is_empty() {
                if let Some(i) = self.free_process() {
                    let (packets, bytes) = self.fill_tb();
                    if !packets.is_empty() {
                        let tb = InFlightTb {
                            packets,
                            bytes,
                            transmissions: 1,
                            due_slot: slot + self.cfg.harq_rtt_slots,
                        };
                        tx_bytes = bytes;
                        let failed = rng.random::<f64>() < self.link.bler;
                        if !failed {
                            self.deliver(tb, slot_end_s);
                        } else if tb.transmissions > self.cfg.harq_max_retx {
                            self.requeue_or_drop(tb);
                        } else {
                            self.flight[i] = Some(tb);
                        }
                    }
                }
            }

            if let Some(t) = trace.as_deref_mut() {
                t.rows.push(SlotTraceRow {
                    slot,
                    buffer_bytes: self.buffer_bytes,
                    tx_bytes,
                    harq_active: self.flight.iter().filter(|p| p.is_some()).count(),
                    drops: self.dropped - drops_before,
                    deliveries: self.delivered - delivered_before,
                });
            }
        }

        self.finish(slots)
    }

    fn finish(mut self, slots: u64) -> RunMetrics {
        let in_flight: u64 = self
            .flight
            .iter()
            .flatten()
            .map(|tb| tb.packets.len() as u64)
            .sum();
        let residual = self.buffer.len() as u64 + in_flight;
        debug_assert_eq!(
            self.generated,
            self.delivered + self.dropped + residual,
            "packet conservation"
        );

        let duration = self.cfg.run_duration_s;
        let (mean_latency_ms, p95_latency_ms) = if self.latencies_s.is_empty() {
            (0.0, 0.0)
        } else {
            let n = self.latencies_s.len();
            let mean = self.latencies_s.iter().sum::<f64>() / n as f64;
            let idx = ((n - 1) as f64 * 0.95).round() as usize;
            let (_, p95, _) = self
                .latencies_s
                .select_nth_unstable_by(idx, |a, b| a.partial_cmp(b).expect("finite latency"));
            (mean * 1e3, *p95 * 1e3)
        };

        RunMetrics {
            offered_mbps: self.generated as f64 * f64::from(self.cfg.packet_bytes) * 8.0
                / duration
                / 1e6,
            delivered_mbps: self.delivered_bytes as f64 * 8.0 / duration / 1e6,
            drop_pct: if self.generated == 0 {
                0.0
            } else {
                100.0 * self.dropped as f64 / self.generated as f64
            },
            mean_latency_ms,
            p95_latency_ms,
            mean_snr_db: self.link.snr_db,
            mcs: self.link.mcs,
            slots_simulated: slots,
            packets_generated: self.generated,
            packets_delivered: self.delivered,
            packets_dropped: self.dropped,
            packets_residual: residual,
            max_buffer_bytes: self.max_buffer_bytes,
        }
    }
}

/// Runs the slot engine for one realization.
pub fn run_realization(
    link: &LinkState,
    cfg: &StackConfig,
    rng: &mut impl Rng,
) -> Result<RunMetrics> {
    cfg.validate()?;
    Ok(Engine::new(link, cfg).run(rng, None))
}

/// Same as [`run_realization`] but also records the per-slot trace.
pub fn run_realization_traced(
    link: &LinkState,
    cfg: &StackConfig,
    rng: &mut impl Rng,
) -> Result<(RunMetrics, SlotTrace)> {
    cfg.validate()?;
    let mut trace = SlotTrace::default();
    let metrics = Engine::new(link, cfg).run(rng, Some(&mut trace));
    Ok((metrics, trace))
}

/// Highest application rate the link sustains, Mbps: the PHY ceiling scaled
/// by the post-HARQ residual loss. Zero in outage.
pub fn saturation_threshold_mbps(link: &LinkState, harq_max_retx: u32) -> f64 {
    if link.is_outage() {
        return 0.0;
    }
    let residual_loss = link.bler.powi(1 + harq_max_retx as i32);
    link.max_phy_mbps * (1.0 - residual_loss)
}
