//! Result serialization: a fixed-schema CSV and a JSON mirror of the same
//! rows. Both formats round-trip losslessly (floats use the shortest
//! representation that parses back to the identical bits; non-finite values
//! are spelled `inf`).

use risce_core::harness::AggregateResult;
#[cfg(test)]
use risce_core::harness::ResultRow;
#[cfg(test)]
use risce_core::{Algorithm, SweepAxis};

pub const CSV_HEADER: &str =
    "sweep_axis,sweep_value,algorithm,nmse_H,nmse_G,nmse_E,mean_iterations,flops,runtime_s,runs,non_converged";

fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
fn parse_f64(s: &str) -> Result<f64, String> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|e| format!("bad float '{other}': {e}")),
    }
}

pub fn to_csv(result: &AggregateResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.sweep_axis,
            fmt_f64(r.sweep_value),
            r.algorithm,
            fmt_f64(r.nmse_h),
            fmt_f64(r.nmse_g),
            fmt_f64(r.nmse_e),
            fmt_f64(r.mean_iterations),
            fmt_f64(r.flops),
            fmt_f64(r.runtime_s),
            r.runs,
            r.non_converged
        ));
    }
    out
}

#[cfg(test)]
pub fn from_csv(text: &str) -> Result<Vec<ResultRow>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    if header != CSV_HEADER {
        return Err(format!("unexpected header '{header}'"));
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 11 {
            return Err(format!("expected 11 fields, got {}: '{line}'", f.len()));
        }
        rows.push(ResultRow {
            sweep_axis: f[0].parse::<SweepAxis>().map_err(|e| e.to_string())?,
            sweep_value: parse_f64(f[1])?,
            algorithm: f[2].parse::<Algorithm>().map_err(|e| e.to_string())?,
            nmse_h: parse_f64(f[3])?,
            nmse_g: parse_f64(f[4])?,
            nmse_e: parse_f64(f[5])?,
            mean_iterations: parse_f64(f[6])?,
            flops: parse_f64(f[7])?,
            runtime_s: parse_f64(f[8])?,
            runs: f[9].parse().map_err(|e| format!("bad runs: {e}"))?,
            non_converged: f[10]
                .parse()
                .map_err(|e| format!("bad non_converged: {e}"))?,
        });
    }
    Ok(rows)
}

fn json_number(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else {
        serde_json::Value::String(fmt_f64(x))
    }
}

pub fn to_json(result: &AggregateResult) -> String {
    let rows: Vec<serde_json::Value> = result
        .rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "sweep_axis": r.sweep_axis.to_string(),
                "sweep_value": json_number(r.sweep_value),
                "algorithm": r.algorithm.to_string(),
                "nmse_H": json_number(r.nmse_h),
                "nmse_G": json_number(r.nmse_g),
                "nmse_E": json_number(r.nmse_e),
                "mean_iterations": json_number(r.mean_iterations),
                "flops": json_number(r.flops),
                "runtime_s": json_number(r.runtime_s),
                "runs": r.runs,
                "non_converged": r.non_converged,
            })
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("serializable") + "\n"
}

#[cfg(test)]
pub fn from_json(text: &str) -> Result<Vec<ResultRow>, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let arr = value.as_array().ok_or("expected a JSON array")?;
    let get_f64 = |v: &serde_json::Value, key: &str| -> Result<f64, String> {
        let field = v.get(key).ok_or_else(|| format!("missing {key}"))?;
        match field {
            serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| format!("bad {key}")),
            serde_json::Value::String(s) => parse_f64(s),
            _ => Err(format!("bad {key}")),
        }
    };
    let get_str = |v: &serde_json::Value, key: &str| -> Result<String, String> {
        Ok(v.get(key)
            .and_then(|x| x.as_str())
            .ok_or_else(|| format!("missing {key}"))?
            .to_string())
    };
    arr.iter()
        .map(|v| {
            Ok(ResultRow {
                sweep_axis: get_str(v, "sweep_axis")?
                    .parse::<SweepAxis>()
                    .map_err(|e| e.to_string())?,
                sweep_value: get_f64(v, "sweep_value")?,
                algorithm: get_str(v, "algorithm")?
                    .parse::<Algorithm>()
                    .map_err(|e| e.to_string())?,
                nmse_h: get_f64(v, "nmse_H")?,
                nmse_g: get_f64(v, "nmse_G")?,
                nmse_e: get_f64(v, "nmse_E")?,
                mean_iterations: get_f64(v, "mean_iterations")?,
                flops: get_f64(v, "flops")?,
                runtime_s: get_f64(v, "runtime_s")?,
                runs: v
                    .get("runs")
                    .and_then(|x| x.as_u64())
                    .ok_or("missing runs")? as usize,
                non_converged: v
                    .get("non_converged")
                    .and_then(|x| x.as_u64())
                    .ok_or("missing non_converged")? as usize,
            })
        })
        .collect()
}
