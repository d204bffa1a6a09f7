use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Lexicon, ScannedFiling};

pub const UNKNOWN: &str = "unknown";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facet {
    Year,
    FormType,
    Industry,
    State,
}

impl Facet {
    pub const ALL: [Facet; 4] = [Facet::Year, Facet::FormType, Facet::Industry, Facet::State];

    pub fn key(self) -> &'static str {
        match self {
            Facet::Year => "year",
            Facet::FormType => "form_type",
            Facet::Industry => "industry",
            Facet::State => "state",
        }
    }

    fn value_of(self, s: &ScannedFiling) -> String {
        use chrono::Datelike;
        let raw = match self {
            Facet::Year => s.filing_date.year().to_string(),
            Facet::FormType => s.form_type.clone(),
            Facet::Industry => s.sic_industry.clone(),
            Facet::State => s.state_of_incorporation.clone(),
        };
        if raw.trim().is_empty() {
            UNKNOWN.to_string()
        } else {
            raw
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacetCell {
    pub facet_value: String,
    pub keyword: String,
    /// Total mentions across the facet value's filings.
    pub count: u64,
    pub filings_with_mention: usize,
    pub filings: usize,
    /// `100 * filings_with_mention / filings`.
    pub share_pct: f64,
}

/// One cell per (facet value, keyword); facet values sorted, keywords in
/// lexicon order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacetTable {
    pub facet: Facet,
    pub cells: Vec<FacetCell>,
}

impl FacetTable {
    pub fn cell(&self, facet_value: &str, keyword: &str) -> Option<&FacetCell> {
        self.cells
            .iter()
            .find(|c| c.facet_value == facet_value && c.keyword == keyword)
    }
}

pub fn facet_breakdown(scans: &[ScannedFiling], lexicon: &Lexicon, facet: Facet) -> FacetTable {
    // facet value -> (filings, per-keyword totals, per-keyword filings with a mention)
    let mut groups: BTreeMap<String, (usize, Vec<u64>, Vec<usize>)> = BTreeMap::new();
    let k = lexicon.len();
    for s in scans {
        let g = groups
            .entry(facet.value_of(s))
            .or_insert_with(|| (0, vec![0; k], vec![0; k]));
        g.0 += 1;
        for (j, &c) in s.counts.iter().enumerate().take(k) {
            g.1[j] += c;
            if c >= 1 {
                g.2[j] += 1;
            }
        }
    }
    let labels = lexicon.labels();
    let mut cells = Vec::with_capacity(groups.len() * k);
    for (value, (filings, totals, with)) in groups {
        for j in 0..k {
            cells.push(FacetCell {
                facet_value: value.clone(),
                keyword: labels[j].clone(),
                count: totals[j],
                filings_with_mention: with[j],
                filings,
                share_pct: 100.0 * with[j] as f64 / filings as f64,
            });
        }
    }
    FacetTable { facet, cells }
}
