//! CSV emission from certificates: exact rationals next to 12-significant-
//! digit decimal columns, fixed column order.

use std::path::Path;

use serde_json::Value;

use liplab_core::rational::Rat;

use crate::files::read_json;
use crate::run::Certificate;
use crate::CliError;

fn rat_at(v: &Value, context: &str) -> Result<Rat, CliError> {
    v.as_str()
        .ok_or_else(|| CliError::Parse(format!("{context}: expected a rational string")))?
        .parse()
        .map_err(|e| CliError::Parse(format!("{context}: {e}")))
}

fn rows_blocking_chain(cert: &Certificate) -> Result<Vec<Vec<String>>, CliError> {
    let chain = cert
        .transcripts
        .pointer("/feasibility/blocking_chain")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::Parse("certificate has no blocking chain series".into()))?;
    let mut rows = vec![vec![
        "index".to_string(),
        "value".to_string(),
        "value_decimal".to_string(),
    ]];
    for (i, v) in chain.iter().enumerate() {
        let r = rat_at(v, "blocking chain entry")?;
        rows.push(vec![i.to_string(), r.to_string(), r.decimal(12)]);
    }
    Ok(rows)
}

fn rows_breakpoints(cert: &Certificate) -> Result<Vec<Vec<String>>, CliError> {
    let bps = cert
        .transcripts
        .pointer("/feasibility/max_map/breakpoints")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::Parse("certificate has no breakpoint series".into()))?;
    let mut rows = vec![vec![
        "x".to_string(),
        "x_decimal".to_string(),
        "y".to_string(),
        "y_decimal".to_string(),
    ]];
    for bp in bps {
        let pair = bp
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| CliError::Parse("breakpoint is not a pair".into()))?;
        let x = rat_at(&pair[0], "breakpoint x")?;
        let y = rat_at(&pair[1], "breakpoint y")?;
        rows.push(vec![
            x.to_string(),
            x.decimal(12),
            y.to_string(),
            y.decimal(12),
        ]);
    }
    Ok(rows)
}

fn rows_defeat_grid(cert: &Certificate) -> Result<Vec<Vec<String>>, CliError> {
    let witnesses = cert
        .transcripts
        .pointer("/witnesses")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::Parse("certificate has no defeat witnesses".into()))?;
    let mut rows = vec![vec![
        "k".to_string(),
        "gamma_star_beta0".to_string(),
        "gamma_star_beta0_decimal".to_string(),
        "d_p_q".to_string(),
        "d_p_q_decimal".to_string(),
    ]];
    for w in witnesses {
        let k = rat_at(
            w.pointer("/k")
                .ok_or_else(|| CliError::Parse("witness misses k".into()))?,
            "witness k",
        )?;
        let beta0 = w
            .pointer("/beta0")
            .and_then(Value::as_u64)
            .ok_or_else(|| CliError::Parse("witness misses beta0".into()))?;
        let gsb = w
            .pointer("/gamma_star/gamma")
            .and_then(Value::as_array)
            .and_then(|a| a.get(beta0 as usize))
            .ok_or_else(|| CliError::Parse("witness misses the diagonal band".into()))?;
        let gsb = rat_at(gsb, "diagonal band")?;
        let d = rat_at(
            w.pointer("/d_p_q")
                .ok_or_else(|| CliError::Parse("witness misses d_p_q".into()))?,
            "witness distance",
        )?;
        rows.push(vec![
            k.to_string(),
            gsb.to_string(),
            gsb.decimal(12),
            d.to_string(),
            d.decimal(12),
        ]);
    }
    Ok(rows)
}

pub fn emit_csv(cert_path: &Path, selector: &str) -> Result<String, CliError> {
    let cert: Certificate = read_json(cert_path)?;
    let rows = match selector {
        "blocking-chain" => rows_blocking_chain(&cert)?,
        "breakpoints" => rows_breakpoints(&cert)?,
        "defeat-grid" => rows_defeat_grid(&cert)?,
        other => {
            return Err(CliError::Parse(format!(
                "unknown selector {other:?}; expected blocking-chain, breakpoints, or defeat-grid"
            )))
        }
    };
    let mut out = String::new();
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}
