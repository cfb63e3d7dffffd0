//! Machine-readable output records, one JSON object per line.

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunReport {
    /// Absent for behavioral runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<String>,
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Verified {
    Decided(bool),
    Undecided(&'static str),
}

impl Verified {
    pub const UNDECIDED: Verified = Verified::Undecided("undecided");
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CanonReport {
    pub cost: String,
    pub numeral: u64,
    pub witness: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verified: Option<Verified>,
    /// Number of rewrite firings in the equality proof, when one was found.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

pub fn to_line<T: Serialize>(record: &T) -> String {
    serde_json::to_string(record).expect("report records always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_report_layout() {
        let cost = RunReport {
            cost: Some("3".into()),
            value: "suc (suc 0)".into(),
            elapsed_ms: None,
        };
        assert_eq!(to_line(&cost), r#"{"cost":"3","value":"suc (suc 0)"}"#);
        let beh = RunReport { cost: None, ..cost };
        assert_eq!(to_line(&beh), r#"{"value":"suc (suc 0)"}"#);
    }

    #[test]
    fn verified_flag_layout() {
        let r = CanonReport {
            cost: "0".into(),
            numeral: 0,
            witness: "ret 0".into(),
            verified: Some(Verified::UNDECIDED),
            trace_len: None,
            elapsed_ms: None,
        };
        assert_eq!(
            to_line(&r),
            r#"{"cost":"0","numeral":0,"witness":"ret 0","verified":"undecided"}"#
        );
        let r = CanonReport {
            verified: Some(Verified::Decided(true)),
            trace_len: Some(0),
            ..r
        };
        assert!(to_line(&r).ends_with(r#""verified":true,"trace_len":0}"#));
    }
}
