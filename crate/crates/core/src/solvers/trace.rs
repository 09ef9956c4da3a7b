use std::io::Write;
use std::time::Instant;

use nalgebra::DVector;

use crate::error::Result;
use crate::problems::DecentralizedProblem;

/// Column header of every trace CSV.
pub const TRACE_HEADER: &str = "iter,obj_gap,feas_max,feas_sum,consensus,gsum_norm,wallclock_s";

/// Metrics of one recorded iteration.
///
/// `obj_gap` is `sum_v f^v(xbar) - f*` (or the raw objective without a
/// reference); feasibility entries are squared distances from `xbar` to the
/// node sets; `consensus` is `sum_v |x^v - xbar|^2`; `gsum_norm` is the
/// squared norm of the sum of the method's tracking variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub obj_gap: f64,
    pub feas_max: f64,
    pub feas_sum: f64,
    pub consensus: f64,
    pub gsum_norm: f64,
    pub wallclock_s: f64,
}

/// Records of the node average at each iteration and of its running time
/// average `(1/K) sum_{k=1..K} xbar_k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    pub instantaneous: Vec<TraceRecord>,
    pub averaged: Vec<TraceRecord>,
}

impl SolverTrace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.instantaneous.last()
    }
}

/// Writes `# key = value` echo lines, the header and one row per record.
pub fn write_trace_csv<W: Write>(out: &mut W, echo: &[(String, String)], records: &[TraceRecord]) -> Result<()> {
    for (k, v) in echo {
        writeln!(out, "# {k} = {v}")?;
    }
    writeln!(out, "{TRACE_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.iter, r.obj_gap, r.feas_max, r.feas_sum, r.consensus, r.gsum_norm, r.wallclock_s
        )?;
    }
    Ok(())
}

/// How a run records its trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordOptions {
    /// Record every `every`-th iteration (the last one is always recorded).
    pub every: usize,
    /// Store elapsed seconds; off by default so traces are reproducible.
    pub wallclock: bool,
}

impl Default for RecordOptions {
    fn default() -> Self {
        Self { every: 1, wallclock: false }
    }
}

/// Accumulates both traces along a run.
pub(crate) struct Recorder<'a> {
    problem: &'a DecentralizedProblem,
    f_star: f64,
    opts: RecordOptions,
    start: Instant,
    sum_locals: Vec<DVector<f64>>,
    sum_track: DVector<f64>,
    count: usize,
    total: usize,
    pub trace: SolverTrace,
}

impl<'a> Recorder<'a> {
    /// Starts from the initial local solutions and tracking sum.
    pub fn new(
        problem: &'a DecentralizedProblem,
        opts: RecordOptions,
        total: usize,
        locals0: &[DVector<f64>],
        track0: &DVector<f64>,
    ) -> Self {
        Self {
            problem,
            f_star: problem.reference().map_or(0.0, |r| r.f_star),
            opts: RecordOptions { every: opts.every.max(1), ..opts },
            start: Instant::now(),
            sum_locals: locals0.to_vec(),
            sum_track: track0.clone(),
            count: 1,
            total,
            trace: SolverTrace::default(),
        }
    }

    /// Feeds the local solutions and the summed tracking variable after
    /// iteration `iter` (counting from one). The averaged record at `K` uses
    /// iterates `0..K`, excluding the current one.
    pub fn observe(&mut self, iter: usize, locals: &[DVector<f64>], track_sum: &DVector<f64>) -> Result<()> {
        if iter.is_multiple_of(self.opts.every) || iter == self.total {
            let wall = if self.opts.wallclock { self.start.elapsed().as_secs_f64() } else { 0.0 };
            let inst = self.metrics(iter, locals, track_sum, wall)?;
            let scale = 1.0 / self.count as f64;
            let avg: Vec<DVector<f64>> = self.sum_locals.iter().map(|s| s * scale).collect();
            let avg_track = &self.sum_track * scale;
            let averaged = self.metrics(iter, &avg, &avg_track, wall)?;
            self.trace.instantaneous.push(inst);
            self.trace.averaged.push(averaged);
        }
        for (s, x) in self.sum_locals.iter_mut().zip(locals) {
            *s += x;
        }
        self.sum_track += track_sum;
        self.count += 1;
        Ok(())
    }

    fn metrics(&self, iter: usize, locals: &[DVector<f64>], track_sum: &DVector<f64>, wall: f64) -> Result<TraceRecord> {
        let xbar = mean(locals);
        let d = self.problem.squared_distances(&xbar)?;
        Ok(TraceRecord {
            iter,
            obj_gap: self.problem.objective(&xbar) - self.f_star,
            feas_max: d.iter().copied().fold(0.0, f64::max),
            feas_sum: d.iter().sum(),
            consensus: locals.iter().map(|x| (x - &xbar).norm_squared()).sum(),
            gsum_norm: track_sum.norm_squared(),
            wallclock_s: wall,
        })
    }
}

pub(crate) fn mean(v: &[DVector<f64>]) -> DVector<f64> {
    let mut s = DVector::zeros(v[0].len());
    for x in v {
        s += x;
    }
    s / v.len() as f64
}

pub(crate) fn sum(v: &[DVector<f64>]) -> DVector<f64> {
    let mut s = DVector::zeros(v[0].len());
    for x in v {
        s += x;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let rec = TraceRecord {
            iter: 3,
            obj_gap: 0.5,
            feas_max: 0.0,
            feas_sum: 1e-3,
            consensus: 2.0,
            gsum_norm: 0.25,
            wallclock_s: 0.0,
        };
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &[("mu".into(), "0.1".into())], &[rec]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# mu = 0.1");
        assert_eq!(lines[1], TRACE_HEADER);
        assert_eq!(lines[2], "3,5e-1,0e0,1e-3,2e0,2.5e-1,0e0");
    }

    #[test]
    fn average_excludes_current_iterate() {
        let problem = crate::problems::build_logcosh_problem(2, 1, 3).unwrap();
        let v = |a: f64| DVector::from_vec(vec![a]);
        let zero = v(0.0);
        let mut rec = Recorder::new(&problem, RecordOptions::default(), 2, &[v(0.0), v(2.0)], &zero);
        rec.observe(1, &[v(4.0), v(4.0)], &zero).unwrap();
        rec.observe(2, &[v(10.0), v(10.0)], &zero).unwrap();
        // K = 1 averages x_0 only, K = 2 averages x_0 and x_1
        assert_eq!(rec.trace.averaged[0].consensus, 2.0);
        assert_eq!(rec.trace.averaged[1].consensus, 0.5);
        assert_eq!(rec.trace.instantaneous[1].consensus, 0.0);
    }

    #[test]
    fn header_only_when_empty() {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &[], &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{TRACE_HEADER}\n"));
    }
}
