//! Metrics file (`key = value` lines) and human-readable tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::metrics::{
    BinaryConfusion, EmotionMetrics, MetricsReport, Prf, RunMeta, SentimentMetrics,
};
use crate::error::{Error, Result};
use crate::resources::Emotion;

fn push_confusion(out: &mut Vec<(String, String)>, prefix: &str, c: &BinaryConfusion) {
    for (k, v) in [("tn", c.tn), ("fp", c.fp), ("fn", c.fn_), ("tp", c.tp)] {
        out.push((format!("{prefix}.confusion.{k}"), v.to_string()));
    }
}

fn push_prf(out: &mut Vec<(String, String)>, prefix: &str, p: &Prf) {
    out.push((format!("{prefix}.precision"), p.precision.to_string()));
    out.push((format!("{prefix}.recall"), p.recall.to_string()));
    out.push((format!("{prefix}.f1"), p.f1.to_string()));
}

fn pairs(m: &MetricsReport) -> Vec<(String, String)> {
    let mut out = vec![
        ("meta.mode".to_string(), m.meta.mode.to_string()),
        ("meta.seed".to_string(), m.meta.seed.to_string()),
        ("meta.epoch".to_string(), m.meta.epoch.to_string()),
    ];
    if let Some(s) = &m.sentiment {
        push_confusion(&mut out, "sentiment", &s.confusion);
        push_prf(&mut out, "sentiment.negative", &s.negative);
        push_prf(&mut out, "sentiment.positive", &s.positive);
        out.push(("sentiment.macro_f1".into(), s.macro_f1.to_string()));
        out.push(("sentiment.micro_f1".into(), s.micro_f1.to_string()));
    }
    if let Some(e) = &m.emotion {
        for l in &e.labels {
            let prefix = format!("emotion.{}", l.label);
            push_confusion(&mut out, &prefix, &l.confusion);
            push_prf(&mut out, &prefix, &l.prf);
        }
        push_prf(&mut out, "emotion.micro", &e.micro);
    }
    out
}

/// Renders the machine-readable metrics file.
pub fn render_metrics(m: &MetricsReport) -> String {
    pairs(m)
        .into_iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}

struct Fields {
    map: BTreeMap<String, String>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Result<String> {
        self.map
            .remove(key)
            .ok_or_else(|| Error::parse("metrics", 0, format!("missing key {key}")))
    }

    fn num<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.take(key)?;
        v.parse()
            .map_err(|_| Error::parse("metrics", 0, format!("bad value for {key}: {v:?}")))
    }

    fn confusion(&mut self, prefix: &str) -> Result<BinaryConfusion> {
        Ok(BinaryConfusion {
            tn: self.num(&format!("{prefix}.confusion.tn"))?,
            fp: self.num(&format!("{prefix}.confusion.fp"))?,
            fn_: self.num(&format!("{prefix}.confusion.fn"))?,
            tp: self.num(&format!("{prefix}.confusion.tp"))?,
        })
    }

    fn prf(&mut self, prefix: &str) -> Result<Prf> {
        Ok(Prf {
            precision: self.num(&format!("{prefix}.precision"))?,
            recall: self.num(&format!("{prefix}.recall"))?,
            f1: self.num(&format!("{prefix}.f1"))?,
        })
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.map.keys().any(|k| k.starts_with(prefix))
    }
}

/// Parses a metrics file written by [`render_metrics`]. Unknown keys are
/// rejected.
pub fn parse_metrics(text: &str) -> Result<MetricsReport> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse("metrics", i + 1, "expected key = value"))?;
        if map
            .insert(k.trim().to_string(), v.trim().to_string())
            .is_some()
        {
            return Err(Error::parse(
                "metrics",
                i + 1,
                format!("duplicate key {}", k.trim()),
            ));
        }
    }
    let mut f = Fields { map };
    let meta = RunMeta {
        mode: f.take("meta.mode")?.parse()?,
        seed: f.num("meta.seed")?,
        epoch: f.num("meta.epoch")?,
    };
    let sentiment = if f.has_prefix("sentiment.") {
        Some(SentimentMetrics {
            confusion: f.confusion("sentiment")?,
            negative: f.prf("sentiment.negative")?,
            positive: f.prf("sentiment.positive")?,
            macro_f1: f.num("sentiment.macro_f1")?,
            micro_f1: f.num("sentiment.micro_f1")?,
        })
    } else {
        None
    };
    let emotion = if f.has_prefix("emotion.") {
        let mut labels = Vec::new();
        for e in Emotion::ALL {
            let prefix = format!("emotion.{e}");
            labels.push(super::metrics::LabelMetrics {
                label: e,
                confusion: f.confusion(&prefix)?,
                prf: f.prf(&prefix)?,
            });
        }
        Some(EmotionMetrics {
            labels,
            micro: f.prf("emotion.micro")?,
        })
    } else {
        None
    };
    if let Some(k) = f.map.keys().next() {
        return Err(Error::parse("metrics", 0, format!("unknown key {k}")));
    }
    Ok(MetricsReport {
        meta,
        sentiment,
        emotion,
    })
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

/// Human-readable report: run summary, sentiment block with its confusion
/// matrix, and the per-emotion P/R/F table with a Micro-Avg column.
pub fn render_table(m: &MetricsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "Run: mode {} seed {} epoch {}",
        m.meta.mode, m.meta.seed, m.meta.epoch
    );
    s.push('\n');
    s.push_str(&render_summary(std::slice::from_ref(m)));
    if let Some(sent) = &m.sentiment {
        s.push('\n');
        let _ = writeln!(s, "Sentiment classes");
        let _ = writeln!(s, "{:<10} {:>9} {:>9} {:>9}", "class", "P", "R", "F");
        for (name, p) in [("negative", sent.negative), ("positive", sent.positive)] {
            let _ = writeln!(
                s,
                "{:<10} {:>9} {:>9} {:>9}",
                name,
                pct(p.precision),
                pct(p.recall),
                pct(p.f1)
            );
        }
        let _ = writeln!(
            s,
            "macro-F1 {}  micro-F1 {}",
            pct(sent.macro_f1),
            pct(sent.micro_f1)
        );
        s.push('\n');
        let c = sent.confusion;
        let _ = writeln!(s, "{:<10} {:>10} {:>10}", "actual", "negative", "positive");
        let _ = writeln!(s, "{:<10} {:>10} {:>10}", "negative", c.tn, c.fp);
        let _ = writeln!(s, "{:<10} {:>10} {:>10}", "positive", c.fn_, c.tp);
    }
    if let Some(emo) = &m.emotion {
        s.push('\n');
        let _ = writeln!(s, "Emotion labels");
        let mut header = format!("{:<7}", "Metric");
        for l in &emo.labels {
            let _ = write!(header, " {:>12}", capitalise(l.label.as_str()));
        }
        let _ = write!(header, " {:>12}", "Micro-Avg");
        let _ = writeln!(s, "{header}");
        for (row, get) in [
            ("P", (|p: &Prf| p.precision) as fn(&Prf) -> f64),
            ("R", |p: &Prf| p.recall),
            ("F", |p: &Prf| p.f1),
        ] {
            let mut line = format!("{row:<7}");
            for l in &emo.labels {
                let _ = write!(line, " {:>12}", pct(get(&l.prf)));
            }
            let _ = write!(line, " {:>12}", pct(get(&emo.micro)));
            let _ = writeln!(s, "{line}");
        }
    }
    s
}

/// One row per run: mode, sentiment macro-F1 and emotion micro-F1.
pub fn render_summary(reports: &[MetricsReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<6} {:>6} {:>10} {:>10}",
        "Model", "Seed", "Sentiment", "Emotion"
    );
    for m in reports {
        let sent = m
            .sentiment
            .as_ref()
            .map_or("-".to_string(), |x| pct(x.macro_f1));
        let emo = m
            .emotion
            .as_ref()
            .map_or("-".to_string(), |x| pct(x.micro.f1));
        let _ = writeln!(
            s,
            "{:<6} {:>6} {:>10} {:>10}",
            m.meta.mode, m.meta.seed, sent, emo
        );
    }
    s
}

fn capitalise(w: &str) -> String {
    let mut c = w.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

/// Writes the metrics file to `path` and the table next to it with a
/// `.table.txt` extension; returns the table.
pub fn report(m: &MetricsReport, path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    fs::write(path, render_metrics(m)).map_err(|e| Error::io(path, e))?;
    let table = render_table(m);
    let table_path = path.with_extension("table.txt");
    fs::write(&table_path, &table).map_err(|e| Error::io(&table_path, e))?;
    Ok(table)
}
