//! Stable CSV/JSON emission of analytic reports and Monte-Carlo
//! comparisons. CSV numbers carry 17 significant digits so values
//! round-trip exactly; JSON uses serde's shortest form.

use serde::Serialize;
use serde_json::json;

use crate::montecarlo::McReport;
use crate::protocol::{Route, SwitchReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// 17 significant digits, round-trip safe.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn route_name(r: Route) -> &'static str {
    match r {
        Route::Bob1 => "Bob1",
        Route::Bob2 => "Bob2",
        Route::None => "None",
    }
}

pub const REPORT_CSV_HEADER: &str = "r_a,r_b,g1,g2,alpha_re,alpha_im,\
v1_x,v1_y,v2_x,v2_y,f1,f2,\
w35_x,w35_y,w35_total,w36_x,w36_y,w36_total,route";

pub fn report_csv_row(r: &SwitchReport) -> String {
    let nums = [
        r.params.r_a,
        r.params.r_b,
        r.params.g1,
        r.params.g2,
        r.params.alpha_re,
        r.params.alpha_im,
        r.v1_x,
        r.v1_y,
        r.v2_x,
        r.v2_y,
        r.f1,
        r.f2,
        r.w35.w_x,
        r.w35.w_y,
        r.w35.total,
        r.w36.w_x,
        r.w36.w_y,
        r.w36.total,
    ];
    let mut row: Vec<String> = nums.iter().copied().map(fmt_g17).collect();
    row.push(route_name(r.route).to_string());
    row.join(",")
}

pub fn report_csv(r: &SwitchReport) -> String {
    format!("{REPORT_CSV_HEADER}\n{}\n", report_csv_row(r))
}

pub fn report_json(r: &SwitchReport) -> String {
    let v = json!({
        "params": {
            "r_a": r.params.r_a,
            "r_b": r.params.r_b,
            "g1": r.params.g1,
            "g2": r.params.g2,
            "alpha_re": r.params.alpha_re,
            "alpha_im": r.params.alpha_im,
        },
        "bob1": { "v_x": r.v1_x, "v_y": r.v1_y, "fidelity": r.f1 },
        "bob2": { "v_x": r.v2_x, "v_y": r.v2_y, "fidelity": r.f2 },
        "witness_35": { "w_x": r.w35.w_x, "w_y": r.w35.w_y, "total": r.w35.total,
                        "entangled": r.w35.entangled() },
        "witness_36": { "w_x": r.w36.w_x, "w_y": r.w36.w_y, "total": r.w36.total,
                        "entangled": r.w36.entangled() },
        "route": route_name(r.route),
    });
    let mut s = serde_json::to_string_pretty(&v).expect("json serialization");
    s.push('\n');
    s
}

pub const MC_CSV_HEADER: &str = "quantity,mc,analytic,se,z,flagged";

pub fn mc_csv(rep: &McReport) -> String {
    let mut out = String::from(MC_CSV_HEADER);
    out.push('\n');
    for e in &rep.entries {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.name,
            fmt_g17(e.mc),
            fmt_g17(e.analytic),
            fmt_g17(e.se),
            fmt_g17(e.z),
            e.flagged
        ));
    }
    for (name, mc, analytic) in [
        ("f1", rep.f1_mc, rep.f1_analytic),
        ("f2", rep.f2_mc, rep.f2_analytic),
    ] {
        out.push_str(&format!(
            "{},{},{},,,{}\n",
            name,
            fmt_g17(mc),
            fmt_g17(analytic),
            (mc - analytic).abs() > 0.01
        ));
    }
    out
}

pub fn mc_json(rep: &McReport) -> String {
    let mut s = serde_json::to_string_pretty(rep).expect("json serialization");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{switch_report, SwitchParams};

    #[test]
    fn csv_row_round_trips_numbers() {
        let p = SwitchParams::new(1.25, -0.75, 1.0, 0.5).with_alpha(0.1, -0.2);
        let r = switch_report(&p).unwrap();
        let row = report_csv_row(&r);
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 19);
        let f1: f64 = fields[10].parse().unwrap();
        assert_eq!(f1, r.f1);
        assert_eq!(fields[18], route_name(r.route));
    }

    #[test]
    fn header_matches_row_width() {
        assert_eq!(REPORT_CSV_HEADER.split(',').count(), 19);
    }

    #[test]
    fn json_contains_documented_keys() {
        let r = switch_report(&SwitchParams::default()).unwrap();
        let s = report_json(&r);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert!(v["bob1"]["fidelity"].is_number());
        assert_eq!(v["route"], "None");
        assert!(v["witness_35"]["entangled"].is_boolean());
    }
}
