//! Optional per-iteration records for the inner and outer loops.

use std::io::Write;

use serde::Serialize;

use crate::inner::StopReason;

#[derive(Clone, Debug, Serialize)]
pub struct InnerRecord {
    pub k: usize,
    pub model_grad_norm: f64,
    pub step_norm: f64,
    /// Right-hand side of the slow-convergence test, `3^8 L^4 beta / (2 M 1.2^k)`.
    pub slow_rhs: f64,
}

/// Estimating-sequence state after the trial: updated to `t + 1` when the
/// trial was accepted, otherwise that of iteration `t`.
#[derive(Clone, Debug, Serialize)]
pub struct AccelInfo {
    pub big_a: f64,
    pub a: f64,
    pub gamma: f64,
    pub v_dist: f64,
    pub phi_star: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OuterRecord {
    pub t: usize,
    pub i: u32,
    pub m_level: f64,
    pub alpha: bool,
    pub inner_iters: usize,
    pub stop_reason: StopReason,
    /// `f(x+)`; absent when the trial was not evaluated (slow convergence or final stop).
    pub f_plus: Option<f64>,
    pub grad_norm_plus: Option<f64>,
    pub accepted: bool,
    /// Anchor of the model (`x_t` for the basic method, `z_{t,i}` for the accelerated one).
    pub anchor: Vec<f64>,
    pub x_plus: Vec<f64>,
    /// `f(x_t)` at the start of the iteration, when known.
    pub f_anchor_iterate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accel: Option<AccelInfo>,
}

pub trait TraceSink {
    fn enabled(&self) -> bool {
        true
    }

    fn inner(&mut self, _rec: &InnerRecord) {}

    fn outer(&mut self, rec: &OuterRecord);
}

/// Discards everything; the solvers skip building records for it.
#[derive(Debug, Default)]
pub struct NullSink;

impl TraceSink for NullSink {
    fn enabled(&self) -> bool {
        false
    }

    fn outer(&mut self, _rec: &OuterRecord) {}
}

#[derive(Debug, Default)]
pub struct MemorySink {
    pub inner: Vec<InnerRecord>,
    pub outer: Vec<OuterRecord>,
}

impl TraceSink for MemorySink {
    fn inner(&mut self, rec: &InnerRecord) {
        self.inner.push(rec.clone());
    }

    fn outer(&mut self, rec: &OuterRecord) {
        self.outer.push(rec.clone());
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line<'a> {
    Inner(&'a InnerRecord),
    Outer(&'a OuterRecord),
}

/// Streams one JSON object per line. Write errors are logged and the first
/// one is kept for [`JsonLinesSink::finish`].
pub struct JsonLinesSink<W: Write> {
    out: W,
    error: Option<std::io::Error>,
}

impl<W: Write> JsonLinesSink<W> {
    pub fn new(out: W) -> Self {
        Self { out, error: None }
    }

    fn write(&mut self, line: Line<'_>) {
        if self.error.is_some() {
            return;
        }
        let res = serde_json::to_writer(&mut self.out, &line)
            .map_err(std::io::Error::from)
            .and_then(|_| self.out.write_all(b"\n"));
        if let Err(e) = res {
            log::warn!("trace sink write failed: {e}");
            self.error = Some(e);
        }
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> TraceSink for JsonLinesSink<W> {
    fn inner(&mut self, rec: &InnerRecord) {
        self.write(Line::Inner(rec));
    }

    fn outer(&mut self, rec: &OuterRecord) {
        self.write(Line::Outer(rec));
    }
}
