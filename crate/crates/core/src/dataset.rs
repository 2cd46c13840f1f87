//! Survey responses: ingestion of raw records, reverse coding, listwise
//! deletion, subscale/composite scoring and quartile grouping.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::stats;
use crate::{Error, Result};

fn default_min() -> i32 {
    1
}

fn default_max() -> i32 {
    5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemSpec {
    pub id: String,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub reversed: bool,
    #[serde(default)]
    pub subscale: Option<String>,
    /// Focal item of its subscale.
    #[serde(default)]
    pub marker: bool,
}

impl ItemSpec {
    pub fn new(id: impl Into<String>) -> Self {
        ItemSpec { id: id.into(), text: String::new(), reversed: false, subscale: None, marker: false }
    }

    pub fn reversed(mut self) -> Self {
        self.reversed = true;
        self
    }

    pub fn in_subscale(mut self, s: impl Into<String>) -> Self {
        self.subscale = Some(s.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub items: Vec<ItemSpec>,
    #[serde(default = "default_min")]
    pub scale_min: i32,
    #[serde(default = "default_max")]
    pub scale_max: i32,
    /// Optional declared subscale order. When empty the order of first
    /// appearance among the items is used.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subscales: Vec<String>,
}

impl Codebook {
    pub fn new(items: Vec<ItemSpec>, scale_min: i32, scale_max: i32) -> Result<Self> {
        let cb = Codebook { items, scale_min, scale_max, subscales: Vec::new() };
        cb.validate()?;
        Ok(cb)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale_min >= self.scale_max {
            return Err(Error::config(format!(
                "scale_min {} must be below scale_max {}",
                self.scale_min, self.scale_max
            )));
        }
        let mut seen = BTreeSet::new();
        for it in &self.items {
            if !seen.insert(it.id.as_str()) {
                return Err(Error::config(format!("duplicate item id `{}`", it.id)));
            }
        }
        let used: BTreeSet<&str> = self.items.iter().filter_map(|i| i.subscale.as_deref()).collect();
        for s in &self.subscales {
            if !used.contains(s.as_str()) {
                return Err(Error::config(format!("subscale `{s}` has no items")));
            }
        }
        if !self.subscales.is_empty() {
            for s in &used {
                if !self.subscales.iter().any(|d| d == s) {
                    return Err(Error::config(format!("subscale `{s}` is not declared")));
                }
            }
        }
        Ok(())
    }

    pub fn item(&self, id: &str) -> Option<&ItemSpec> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn item_ids(&self) -> Vec<String> {
        self.items.iter().map(|i| i.id.clone()).collect()
    }

    /// Subscales with their member item ids, in declared (or first-seen) order.
    pub fn subscale_groups(&self) -> Vec<(String, Vec<String>)> {
        let mut order: Vec<String> = self.subscales.clone();
        for it in &self.items {
            if let Some(s) = &it.subscale
                && !order.contains(s) {
                    order.push(s.clone());
                }
        }
        order
            .into_iter()
            .map(|s| {
                let members = self
                    .items
                    .iter()
                    .filter(|i| i.subscale.as_deref() == Some(s.as_str()))
                    .map(|i| i.id.clone())
                    .collect();
                (s, members)
            })
            .collect()
    }
}

/// n respondents × p items; `None` marks a missing response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResponseMatrix {
    pub respondent_ids: Vec<String>,
    pub item_ids: Vec<String>,
    pub scale_min: i32,
    pub scale_max: i32,
    rows: Vec<Vec<Option<i32>>>,
}

impl ResponseMatrix {
    pub fn new(
        respondent_ids: Vec<String>,
        item_ids: Vec<String>,
        scale_min: i32,
        scale_max: i32,
        rows: Vec<Vec<Option<i32>>>,
    ) -> Result<Self> {
        if respondent_ids.len() != rows.len() {
            return Err(Error::Dimension("one id per row required".into()));
        }
        let mut seen = BTreeSet::new();
        for id in &respondent_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::config(format!("duplicate respondent id `{id}`")));
            }
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != item_ids.len() {
                return Err(Error::Dimension(format!("row {r} has {} values", row.len())));
            }
            for v in row.iter().flatten() {
                if *v < scale_min || *v > scale_max {
                    return Err(Error::Domain(format!("value {v} outside [{scale_min}, {scale_max}]")));
                }
            }
        }
        Ok(ResponseMatrix { respondent_ids, item_ids, scale_min, scale_max, rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn p(&self) -> usize {
        self.item_ids.len()
    }

    pub fn get(&self, respondent: usize, item: usize) -> Option<i32> {
        self.rows[respondent][item]
    }

    pub fn row(&self, respondent: usize) -> &[Option<i32>] {
        &self.rows[respondent]
    }

    pub fn rows(&self) -> &[Vec<Option<i32>>] {
        &self.rows
    }

    pub fn item_index(&self, id: &str) -> Option<usize> {
        self.item_ids.iter().position(|i| i == id)
    }

    fn indices(&self, items: &[String]) -> Result<Vec<usize>> {
        items
            .iter()
            .map(|id| self.item_index(id).ok_or_else(|| Error::config(format!("unknown item `{id}`"))))
            .collect()
    }

    /// Column `item` as reals with missing preserved.
    pub fn column(&self, item: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r[item].map(f64::from)).collect()
    }

    /// Complete-case data over all items, one `Vec` per row.
    pub fn complete_rows(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .filter(|r| r.iter().all(Option::is_some))
            .map(|r| r.iter().map(|v| f64::from(v.unwrap())).collect())
            .collect()
    }

    /// Complete-case data as one `Vec` per item (column-major).
    pub fn complete_columns(&self) -> Vec<Vec<f64>> {
        let rows = self.complete_rows();
        (0..self.p()).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
    }

    /// Restriction to the given items (same respondents).
    pub fn select_items(&self, items: &[String]) -> Result<ResponseMatrix> {
        let idx = self.indices(items)?;
        let rows = self.rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect();
        Ok(ResponseMatrix {
            respondent_ids: self.respondent_ids.clone(),
            item_ids: items.to_vec(),
            scale_min: self.scale_min,
            scale_max: self.scale_max,
            rows,
        })
    }

    pub fn select_respondents(&self, keep: &[usize]) -> ResponseMatrix {
        ResponseMatrix {
            respondent_ids: keep.iter().map(|&i| self.respondent_ids[i].clone()).collect(),
            item_ids: self.item_ids.clone(),
            scale_min: self.scale_min,
            scale_max: self.scale_max,
            rows: keep.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

/// Header plus string cells, as read from a delimited file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// A row is kept only if its value in `column` is one of `allowed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisqualifyRule {
    pub column: String,
    pub allowed: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    pub dedup_key: String,
    /// Column providing respondent ids; defaults to the dedup key.
    #[serde(default)]
    pub id_column: Option<String>,
    #[serde(default)]
    pub disqualify: Vec<DisqualifyRule>,
    /// Rows with more missing (or invalid) item cells than this are disqualified.
    #[serde(default)]
    pub max_missing_items: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowError {
    /// 1-based data row number in the source.
    pub row: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub row: usize,
    pub respondent_id: String,
    pub item: String,
    pub value: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disqualification {
    pub row: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub received: usize,
    pub malformed: usize,
    pub duplicates: usize,
    pub disqualified: usize,
    pub retained: usize,
    pub row_errors: Vec<RowError>,
    pub cell_errors: Vec<CellError>,
    pub disqualifications: Vec<Disqualification>,
}

/// Non-item columns of retained rows, aligned with the response matrix.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Metadata {
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ingested {
    pub matrix: ResponseMatrix,
    pub metadata: Metadata,
    pub report: IngestReport,
}

pub fn is_missing_token(s: &str) -> bool {
    let t = s.trim();
    t.is_empty() || t.eq_ignore_ascii_case("NA")
}

fn parse_likert(s: &str) -> Option<i32> {
    let t = s.trim();
    if let Ok(v) = t.parse::<i32>() {
        return Some(v);
    }
    let f: f64 = t.parse().ok()?;
    (f.fract() == 0.0 && f.abs() < i32::MAX as f64).then_some(f as i32)
}

/// Turn raw records into a response matrix.
///
/// Processing order: malformed rows, duplicates on `dedup_key` (first
/// occurrence wins), disqualification rules, missing-item cap. Bad cells
/// become missing and are reported, so listwise analyses drop the row.
pub fn ingest(table: &RawTable, cb: &Codebook, opts: &IngestOptions) -> Result<Ingested> {
    cb.validate()?;
    if table.rows.is_empty() {
        return Err(Error::EmptySource);
    }
    let col = |name: &str| table.header.iter().position(|h| h == name);
    let key_col = col(&opts.dedup_key)
        .ok_or_else(|| Error::config(format!("dedup key column `{}` not found", opts.dedup_key)))?;
    let id_col = match &opts.id_column {
        Some(c) => col(c).ok_or_else(|| Error::config(format!("id column `{c}` not found")))?,
        None => key_col,
    };
    let item_cols: Vec<usize> = cb
        .items
        .iter()
        .map(|it| col(&it.id).ok_or_else(|| Error::config(format!("item column `{}` not found", it.id))))
        .collect::<Result<_>>()?;
    let rules: Vec<(usize, &DisqualifyRule)> = opts
        .disqualify
        .iter()
        .map(|r| {
            col(&r.column)
                .map(|c| (c, r))
                .ok_or_else(|| Error::config(format!("disqualify column `{}` not found", r.column)))
        })
        .collect::<Result<_>>()?;
    let item_set: BTreeSet<usize> = item_cols.iter().copied().collect();
    let meta_cols: Vec<usize> = (0..table.header.len()).filter(|c| !item_set.contains(c)).collect();

    let mut report = IngestReport { received: table.rows.len(), ..Default::default() };
    let mut seen_keys = BTreeSet::new();
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut meta_rows = Vec::new();

    'rows: for (r, raw) in table.rows.iter().enumerate() {
        let rowno = r + 1;
        if raw.len() != table.header.len() {
            report.malformed += 1;
            report.row_errors.push(RowError {
                row: rowno,
                message: format!("expected {} fields, found {}", table.header.len(), raw.len()),
            });
            continue;
        }
        let key = raw[key_col].trim();
        if !key.is_empty() && !seen_keys.insert(key.to_string()) {
            report.duplicates += 1;
            continue;
        }
        for (c, rule) in &rules {
            let v = raw[*c].trim();
            if !rule.allowed.iter().any(|a| a == v) {
                report.disqualified += 1;
                report.disqualifications.push(Disqualification {
                    row: rowno,
                    reason: format!("{} = `{v}` not allowed", rule.column),
                });
                continue 'rows;
            }
        }
        let id = raw[id_col].trim().to_string();
        let mut values = Vec::with_capacity(item_cols.len());
        let mut cell_errors = Vec::new();
        for (it, &c) in cb.items.iter().zip(&item_cols) {
            let cell = &raw[c];
            if is_missing_token(cell) {
                values.push(None);
                continue;
            }
            match parse_likert(cell) {
                Some(v) if v >= cb.scale_min && v <= cb.scale_max => values.push(Some(v)),
                parsed => {
                    let message = if parsed.is_some() {
                        format!("outside scale [{}, {}]", cb.scale_min, cb.scale_max)
                    } else {
                        "not an integer response".to_string()
                    };
                    cell_errors.push(CellError {
                        row: rowno,
                        respondent_id: id.clone(),
                        item: it.id.clone(),
                        value: cell.clone(),
                        message,
                    });
                    values.push(None);
                }
            }
        }
        report.cell_errors.extend(cell_errors);
        if let Some(cap) = opts.max_missing_items {
            let missing = values.iter().filter(|v| v.is_none()).count();
            if missing > cap {
                report.disqualified += 1;
                report.disqualifications.push(Disqualification {
                    row: rowno,
                    reason: format!("{missing} missing items exceeds cap {cap}"),
                });
                continue;
            }
        }
        ids.push(id);
        rows.push(values);
        meta_rows.push(meta_cols.iter().map(|&c| raw[c].clone()).collect());
    }
    report.retained = rows.len();
    let matrix = ResponseMatrix::new(ids, cb.item_ids(), cb.scale_min, cb.scale_max, rows)?;
    let metadata = Metadata {
        columns: meta_cols.iter().map(|&c| table.header[c].clone()).collect(),
        rows: meta_rows,
    };
    Ok(Ingested { matrix, metadata, report })
}

// ---------------------------------------------------------------------------
// Transformations and scoring
// ---------------------------------------------------------------------------

/// Reflect reversed items: `v ↦ min + max − v`. Missing stays missing.
pub fn reverse_code(m: &ResponseMatrix, cb: &Codebook) -> ResponseMatrix {
    let flip: Vec<bool> =
        m.item_ids.iter().map(|id| cb.item(id).is_some_and(|i| i.reversed)).collect();
    let total = m.scale_min + m.scale_max;
    let rows = m
        .rows
        .iter()
        .map(|r| r.iter().zip(&flip).map(|(v, &f)| if f { v.map(|x| total - x) } else { *v }).collect())
        .collect();
    ResponseMatrix { rows, ..m.clone() }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Listwise {
    pub matrix: ResponseMatrix,
    pub removed: usize,
}

/// Drop respondents with any missing value among `items`.
pub fn listwise(m: &ResponseMatrix, items: &[String]) -> Result<Listwise> {
    let idx = m.indices(items)?;
    let keep: Vec<usize> =
        (0..m.n()).filter(|&i| idx.iter().all(|&j| m.rows[i][j].is_some())).collect();
    if keep.is_empty() {
        return Err(Error::NoCompleteCases);
    }
    Ok(Listwise { removed: m.n() - keep.len(), matrix: m.select_respondents(&keep) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Mean,
    Sum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreColumn {
    pub name: String,
    pub aggregation: Aggregation,
    pub items: Vec<String>,
    pub values: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub respondent_ids: Vec<String>,
    pub columns: Vec<ScoreColumn>,
}

impl ScoreTable {
    pub fn column(&self, name: &str) -> Option<&ScoreColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    /// Rows complete on every column, as column-major vectors.
    pub fn complete_columns(&self) -> Vec<Vec<f64>> {
        let n = self.respondent_ids.len();
        let keep: Vec<usize> =
            (0..n).filter(|&i| self.columns.iter().all(|c| c.values[i].is_some())).collect();
        self.columns.iter().map(|c| keep.iter().map(|&i| c.values[i].unwrap()).collect()).collect()
    }

    pub fn merge(mut self, other: ScoreTable) -> Result<ScoreTable> {
        if self.respondent_ids != other.respondent_ids {
            return Err(Error::config("score tables cover different respondents"));
        }
        self.columns.extend(other.columns);
        Ok(self)
    }
}

/// Score named item groups. A respondent missing any constituent item gets
/// a missing score (no proration).
pub fn score_groups(
    m: &ResponseMatrix,
    groups: &[(String, Vec<String>)],
    agg: Aggregation,
) -> Result<ScoreTable> {
    let mut columns = Vec::with_capacity(groups.len());
    for (name, items) in groups {
        if items.is_empty() {
            return Err(Error::config(format!("`{name}` has no items")));
        }
        let idx = m.indices(items)?;
        let values = m
            .rows
            .iter()
            .map(|r| {
                let vals: Option<Vec<f64>> = idx.iter().map(|&j| r[j].map(f64::from)).collect();
                vals.map(|v| match agg {
                    Aggregation::Sum => v.iter().sum(),
                    Aggregation::Mean => stats::mean(&v),
                })
            })
            .collect();
        columns.push(ScoreColumn { name: name.clone(), aggregation: agg, items: items.clone(), values });
    }
    Ok(ScoreTable { respondent_ids: m.respondent_ids.clone(), columns })
}

/// One column per codebook subscale. Expects reverse coding already applied.
pub fn subscale_scores(m: &ResponseMatrix, cb: &Codebook, agg: Aggregation) -> Result<ScoreTable> {
    let groups = cb.subscale_groups();
    if groups.is_empty() {
        return Err(Error::config("codebook defines no subscales"));
    }
    score_groups(m, &groups, agg)
}

/// Summed score over `items`. With ten five-point items the range is [10, 50].
pub fn composite_score(m: &ResponseMatrix, name: &str, items: &[String]) -> Result<ScoreTable> {
    score_groups(m, &[(name.to_string(), items.to_vec())], Aggregation::Sum)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Group {
    Low,
    Mid,
    High,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupLabel {
    pub respondent_id: String,
    pub group: Group,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuartileSplit {
    pub q1: f64,
    pub q3: f64,
    pub labels: Vec<GroupLabel>,
    /// Q1 == Q3: respondents at that value satisfy both bounds and are
    /// labelled LOW.
    pub degenerate_split: bool,
}

impl QuartileSplit {
    pub fn count(&self, g: Group) -> usize {
        self.labels.iter().filter(|l| l.group == g).count()
    }
}

/// Bottom quartile (≤ Q1) LOW, top quartile (≥ Q3) HIGH, the rest MID.
/// Respondents with a missing score are not labelled.
pub fn quartile_classify(ids: &[String], scores: &[Option<f64>]) -> Result<QuartileSplit> {
    let present: Vec<(usize, f64)> =
        scores.iter().enumerate().filter_map(|(i, s)| s.map(|v| (i, v))).collect();
    if present.len() < 4 {
        return Err(Error::insufficient(format!("{} scores, need at least 4", present.len())));
    }
    let vals: Vec<f64> = present.iter().map(|p| p.1).collect();
    let q1 = stats::quantile(&vals, 0.25);
    let q3 = stats::quantile(&vals, 0.75);
    let labels = present
        .iter()
        .map(|&(i, v)| GroupLabel {
            respondent_id: ids[i].clone(),
            group: if v <= q1 {
                Group::Low
            } else if v >= q3 {
                Group::High
            } else {
                Group::Mid
            },
        })
        .collect();
    Ok(QuartileSplit { q1, q3, labels, degenerate_split: q1 == q3 })
}

/// Groups the retained respondents by the value of a metadata column.
pub fn group_by_column(meta: &Metadata, column: &str) -> Result<BTreeMap<String, Vec<usize>>> {
    let vals = meta.column(column).ok_or_else(|| Error::config(format!("column `{column}` not found")))?;
    let mut out: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, v) in vals.into_iter().enumerate() {
        if !is_missing_token(v) {
            out.entry(v.trim().to_string()).or_default().push(i);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn s(v: &str) -> String {
        v.to_string()
    }

    fn cb5() -> Codebook {
        Codebook::new(
            vec![
                ItemSpec::new("a").in_subscale("use"),
                ItemSpec::new("b").in_subscale("use").reversed(),
                ItemSpec::new("c").in_subscale("int"),
            ],
            1,
            5,
        )
        .unwrap()
    }

    fn matrix(rows: Vec<Vec<Option<i32>>>) -> ResponseMatrix {
        let ids = (0..rows.len()).map(|i| format!("r{i}")).collect();
        ResponseMatrix::new(ids, vec![s("a"), s("b"), s("c")], 1, 5, rows).unwrap()
    }

    #[test]
    fn codebook_invariants() {
        assert!(Codebook::new(vec![ItemSpec::new("a"), ItemSpec::new("a")], 1, 5).is_err());
        assert!(Codebook::new(vec![ItemSpec::new("a")], 5, 5).is_err());
        let mut cb = cb5();
        cb.subscales = vec![s("use"), s("int"), s("ghost")];
        assert_eq!(cb.validate().unwrap_err().code(), "CONFIG_ERROR");
    }

    #[test]
    fn reverse_coding_examples() {
        let m = matrix(vec![vec![Some(2), Some(5), None], vec![Some(2), Some(3), Some(4)]]);
        let r = reverse_code(&m, &cb5());
        assert_eq!(r.row(0), &[Some(2), Some(1), None]);
        assert_eq!(r.row(1), &[Some(2), Some(3), Some(4)]);
        assert_eq!(reverse_code(&r, &cb5()), m);
    }

    #[test]
    fn listwise_rules() {
        let m = matrix(vec![vec![Some(1), Some(2), Some(3)], vec![Some(1), None, Some(3)]]);
        let all = m.item_ids.clone();
        let lw = listwise(&m, &all).unwrap();
        assert_eq!((lw.matrix.n(), lw.removed), (1, 1));
        let lw = listwise(&m, &[s("a"), s("c")]).unwrap();
        assert_eq!(lw.matrix, m);
        let empty = matrix(vec![vec![None, None, None]; 3]);
        assert_eq!(listwise(&empty, &all).unwrap_err(), Error::NoCompleteCases);
    }

    #[test]
    fn scoring_examples() {
        let ids: Vec<String> = (0..5).map(|i| format!("i{i}")).collect();
        let m = ResponseMatrix::new(vec![s("r")], ids.clone(), 1, 5, vec![vec![Some(4); 5]]).unwrap();
        let t = score_groups(&m, &[(s("x"), ids.clone())], Aggregation::Mean).unwrap();
        assert_eq!(t.columns[0].values, vec![Some(4.0)]);
        let t = score_groups(&m, &[(s("x"), ids.clone())], Aggregation::Sum).unwrap();
        assert_eq!(t.columns[0].values, vec![Some(20.0)]);

        let m = ResponseMatrix::new(vec![s("r")], ids[..3].to_vec(), 1, 5, vec![vec![Some(2), Some(3), Some(5)]])
            .unwrap();
        let t = composite_score(&m, "total", &ids[..3]).unwrap();
        assert_eq!(t.columns[0].values, vec![Some(10.0)]);
        assert_eq!(
            score_groups(&m, &[(s("empty"), vec![])], Aggregation::Mean).unwrap_err().code(),
            "CONFIG_ERROR"
        );
    }

    #[test]
    fn incomplete_subscale_is_missing() {
        let m = matrix(vec![vec![Some(4), None, Some(2)]]);
        let t = subscale_scores(&m, &cb5(), Aggregation::Mean).unwrap();
        assert_eq!(t.column("use").unwrap().values, vec![None]);
        assert_eq!(t.column("int").unwrap().values, vec![Some(2.0)]);
    }

    #[test]
    fn quartiles() {
        let ids: Vec<String> = (1..=8).map(|i| format!("r{i}")).collect();
        let scores: Vec<Option<f64>> = (1..=8).map(|v| Some(v as f64)).collect();
        let q = quartile_classify(&ids, &scores).unwrap();
        assert!((q.q1 - 2.75).abs() < 1e-12 && (q.q3 - 6.25).abs() < 1e-12);
        assert_eq!((q.count(Group::Low), q.count(Group::Mid), q.count(Group::High)), (2, 4, 2));
        assert!(!q.degenerate_split);

        let flat = quartile_classify(&ids, &[Some(3.0); 8]).unwrap();
        assert!(flat.degenerate_split);
        assert_eq!(flat.q1, flat.q3);

        let few = quartile_classify(&ids[..3], &[Some(1.0), Some(2.0), None]);
        assert_eq!(few.unwrap_err().code(), "INSUFFICIENT_DATA");
    }

    fn table(rows: &[&[&str]]) -> RawTable {
        RawTable {
            header: vec![s("email"), s("taught"), s("a"), s("b"), s("c")],
            rows: rows.iter().map(|r| r.iter().map(|c| s(c)).collect()).collect(),
        }
    }

    #[test]
    fn ingest_flow() {
        let t = table(&[
            &["x@a", "yes", "1", "2", "3"],
            &["y@a", "yes", "6", "2", "NA"],
            &["x@a", "yes", "5", "5", "5"],
            &["z@a", "no", "1", "1", "1"],
            &["w@a", "yes", "1"],
        ]);
        let opts = IngestOptions {
            dedup_key: s("email"),
            disqualify: vec![DisqualifyRule { column: s("taught"), allowed: vec![s("yes")] }],
            ..Default::default()
        };
        let out = ingest(&t, &cb5(), &opts).unwrap();
        let r = &out.report;
        assert_eq!((r.received, r.malformed, r.duplicates, r.disqualified, r.retained), (5, 1, 1, 1, 2));
        assert_eq!(r.cell_errors.len(), 1);
        assert_eq!(r.cell_errors[0].item, "a");
        assert_eq!(out.matrix.row(1), &[None, Some(2), None]);
        assert_eq!(out.metadata.columns, vec![s("email"), s("taught")]);
        // the bad cell excludes the row from listwise analyses
        assert_eq!(listwise(&out.matrix, &out.matrix.item_ids).unwrap().matrix.n(), 1);
    }

    #[test]
    fn ingest_errors() {
        let opts = IngestOptions { dedup_key: s("email"), ..Default::default() };
        assert_eq!(ingest(&table(&[]), &cb5(), &opts).unwrap_err(), Error::EmptySource);
        let bad = IngestOptions { dedup_key: s("nope"), ..Default::default() };
        assert!(ingest(&table(&[&["x", "y", "1", "1", "1"]]), &cb5(), &bad).unwrap_err().is_configuration());
    }
}
