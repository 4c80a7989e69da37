//! CSV writers for every artifact format. Floats use Rust's shortest
//! round-trip formatting, so identical runs produce byte-identical files.

use std::fs;
use std::path::Path;

use anyhow::Result;

use kpp_core::bbm::PopulationSnapshot;
use kpp_core::martingales::{CheckpointSummary, MartingaleReport};
use kpp_core::pde_2d::Field2D;
use kpp_core::stats::EstimateCi;
use kpp_core::waves_1d::Profile1D;

/// `replica,t,id,parent_id,x,y,max_drift_excess` — one row per alive particle.
pub fn snapshot_csv(series: &[(u64, Vec<PopulationSnapshot>)]) -> String {
    let mut out = String::from("replica,t,id,parent_id,x,y,max_drift_excess\n");
    for (replica, snaps) in series {
        for snap in snaps {
            for p in &snap.particles {
                let parent = p.parent_id.map(|v| v.to_string()).unwrap_or_default();
                out.push_str(&format!(
                    "{replica},{},{},{parent},{},{},{}\n",
                    snap.t, p.id, p.x, p.y, p.max_drift_excess
                ));
            }
        }
    }
    out
}

/// Long-format series:
/// `replica,t,A,D,W,Z,alpha,Z_alpha,lambda,mu,W_lm`.
pub fn martingale_series_csv(reports: &[Vec<MartingaleReport>]) -> String {
    let mut out = String::from("replica,t,A,D,W,Z,alpha,Z_alpha,lambda,mu,W_lm\n");
    for (replica, per_ck) in reports.iter().enumerate() {
        for rep in per_ck {
            let n = rep.z_alpha.len().max(rep.w_lm.len()).max(1);
            for k in 0..n {
                let (alpha, z_alpha) = rep
                    .z_alpha
                    .get(k)
                    .map(|&(a, v)| (a.to_string(), v.to_string()))
                    .unwrap_or_default();
                let (lambda, mu, w_lm) = rep
                    .w_lm
                    .get(k)
                    .map(|&((l, m), v)| (l.to_string(), m.to_string(), v.to_string()))
                    .unwrap_or_default();
                out.push_str(&format!(
                    "{replica},{},{},{},{},{},{alpha},{z_alpha},{lambda},{mu},{w_lm}\n",
                    rep.t, rep.a, rep.d, rep.w, rep.z
                ));
            }
        }
    }
    out
}

/// Per-checkpoint quartiles: `t,quantity,alpha,lambda,mu,q25,median,q75`.
pub fn summary_csv(summaries: &[CheckpointSummary]) -> String {
    let mut out = String::from("t,quantity,alpha,lambda,mu,q25,median,q75\n");
    for s in summaries {
        let mut push = |name: &str, alpha: String, lm: (String, String), q: &kpp_core::martingales::Quartiles| {
            out.push_str(&format!(
                "{},{name},{alpha},{},{},{},{},{}\n",
                s.t, lm.0, lm.1, q.q1, q.median, q.q3
            ));
        };
        push("A", String::new(), (String::new(), String::new()), &s.a);
        push("D", String::new(), (String::new(), String::new()), &s.d);
        push("W", String::new(), (String::new(), String::new()), &s.w);
        push("Z", String::new(), (String::new(), String::new()), &s.z);
        for (a, q) in &s.d_alpha {
            push("D_alpha", a.to_string(), (String::new(), String::new()), q);
        }
        for (a, q) in &s.z_alpha {
            push("Z_alpha", a.to_string(), (String::new(), String::new()), q);
        }
        for ((l, m), q) in &s.w_lm {
            push("W_lm", String::new(), (l.to_string(), m.to_string()), q);
        }
    }
    out
}

/// Probe-grid estimates: `x,y,estimate,std_error,replicas,T,alpha`.
pub fn probe_grid_csv(rows: &[(f64, f64, EstimateCi, f64)]) -> String {
    let mut out = String::from("x,y,estimate,std_error,replicas,T,alpha\n");
    for (x, y, est, alpha) in rows {
        out.push_str(&format!(
            "{x},{y},{},{},{},{},{alpha}\n",
            est.value, est.std_error, est.replicas, est.horizon_t
        ));
    }
    out
}

/// 1D profile: `x,value`.
pub fn profile_csv(profile: &Profile1D) -> String {
    let mut out = String::from("x,value\n");
    for i in 0..profile.len() {
        out.push_str(&format!("{},{}\n", profile.x_at(i), profile.values[i]));
    }
    out
}

/// 2D field: `x,y,value`, row-major bottom to top.
pub fn field_csv(field: &Field2D) -> String {
    let mut out = String::from("x,y,value\n");
    for j in 0..field.ny {
        let y = field.y_lo + field.hy * j as f64;
        for i in 0..field.nx {
            let x = field.x_lo + field.hx * i as f64;
            out.push_str(&format!("{x},{y},{}\n", field.at(i, j)));
        }
    }
    out
}

/// Verification reports: `check,param,y,value,tolerance,pass`.
pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("check,param,y,value,tolerance,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.check, r.param, r.y, r.value, r.tolerance, r.pass
        ));
    }
    out
}

/// One row of a verification report.
#[derive(Clone, Debug)]
pub struct ReportRow {
    pub check: String,
    pub param: String,
    pub y: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use kpp_core::bbm::{simulate_replica, SimConfig};

    #[test]
    fn snapshot_csv_is_deterministic_and_well_formed() {
        let cfg = SimConfig::new(1.0, 1.0, true, 7).with_checkpoints(&[0.5, 1.0]);
        let snaps = simulate_replica(&cfg).unwrap();
        let a = snapshot_csv(&[(0, snaps.clone())]);
        let b = snapshot_csv(&[(0, snaps)]);
        assert_eq!(a, b);
        let mut lines = a.lines();
        assert_eq!(lines.next().unwrap(), "replica,t,id,parent_id,x,y,max_drift_excess");
        for line in lines {
            assert_eq!(line.split(',').count(), 7, "bad row: {line}");
        }
    }
}
