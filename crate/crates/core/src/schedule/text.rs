//! Line-oriented schedule format.
//!
//! ```text
//! # protocol=fanout alpha=1.0000000000000000e0 layout=1d:8
//! 0 local 1 0:1.0000000000000000e0 1.5707963267948966e0 1
//! ```
//!
//! One pulse per line: `layer kind target controls duration phase_flag`.
//! Controls are `site:strength` pairs joined by commas, or `-` when empty.
//! Floats carry 17 significant digits so a round trip is exact.

use std::fmt::Write as _;

use super::{Control, ProtocolSchedule, Pulse, PulseKind, ScheduleLayer};
use crate::error::{Error, Result};
use crate::numeric::fmt17;

pub fn write_schedule(schedule: &ProtocolSchedule) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# protocol={} alpha={} layout={}",
        schedule.protocol,
        fmt17(schedule.alpha),
        schedule.layout_id
    );
    for (li, layer) in schedule.layers().iter().enumerate() {
        for p in layer.pulses() {
            let kind = match p.kind {
                PulseKind::LocalGate => "local",
                PulseKind::ControlledX => "cx",
            };
            let controls = if p.controls.is_empty() {
                "-".to_string()
            } else {
                p.controls
                    .iter()
                    .map(|c| format!("{}:{}", c.site, fmt17(c.strength)))
                    .collect::<Vec<_>>()
                    .join(",")
            };
            let _ = writeln!(
                out,
                "{li} {kind} {} {controls} {} {}",
                p.target,
                fmt17(p.duration),
                u8::from(p.phase_correction)
            );
        }
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_schedule(text: &str) -> Result<ProtocolSchedule> {
    let mut alpha = 0.0;
    let mut layout_id = String::new();
    let mut protocol = String::new();
    let mut layers: Vec<Vec<Pulse>> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            for kv in header.split_whitespace() {
                match kv.split_once('=') {
                    Some(("protocol", v)) => protocol = v.to_string(),
                    Some(("layout", v)) => layout_id = v.to_string(),
                    Some(("alpha", v)) => {
                        alpha = v.parse().map_err(|_| parse_err(lineno, "bad alpha"))?
                    }
                    _ => {}
                }
            }
            continue;
        }

        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(parse_err(lineno, format!("expected 6 fields, got {}", fields.len())));
        }
        let layer: usize = fields[0].parse().map_err(|_| parse_err(lineno, "bad layer index"))?;
        let kind = match fields[1] {
            "local" => PulseKind::LocalGate,
            "cx" => PulseKind::ControlledX,
            other => return Err(parse_err(lineno, format!("unknown kind {other:?}"))),
        };
        let target: usize = fields[2].parse().map_err(|_| parse_err(lineno, "bad target"))?;
        let controls = if fields[3] == "-" {
            Vec::new()
        } else {
            fields[3]
                .split(',')
                .map(|pair| {
                    let (s, h) = pair
                        .split_once(':')
                        .ok_or_else(|| parse_err(lineno, "control needs site:strength"))?;
                    Ok(Control {
                        site: s.parse().map_err(|_| parse_err(lineno, "bad control site"))?,
                        strength: h.parse().map_err(|_| parse_err(lineno, "bad strength"))?,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        };
        let duration: f64 = fields[4].parse().map_err(|_| parse_err(lineno, "bad duration"))?;
        let phase_correction = match fields[5] {
            "0" => false,
            "1" => true,
            _ => return Err(parse_err(lineno, "phase flag must be 0 or 1")),
        };
        if layer < layers.len().saturating_sub(1) {
            return Err(parse_err(lineno, "layer indices must be non-decreasing"));
        }
        while layers.len() <= layer {
            layers.push(Vec::new());
        }
        layers[layer].push(Pulse { kind, controls, target, duration, phase_correction });
    }

    let layers = layers
        .into_iter()
        .enumerate()
        .map(|(i, pulses)| {
            ScheduleLayer::new(pulses).map_err(|e| parse_err(0, format!("layer {i}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProtocolSchedule::new(layers, alpha, &layout_id, &protocol))
}
