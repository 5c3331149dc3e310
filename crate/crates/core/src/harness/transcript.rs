//! Transcript files: one JSON record per episode, one file per question.

use std::fs;
use std::path::{Path, PathBuf};

use super::Transcript;

/// File name for a question id; characters outside `[A-Za-z0-9_.-]` become
/// `_`.
pub fn transcript_path(dir: &Path, question_id: &str) -> PathBuf {
    let safe: String = question_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.-".contains(c) { c } else { '_' })
        .collect();
    dir.join(format!("{safe}.jsonl"))
}

/// Writes through a temporary file so a crash never leaves half a record.
pub fn write_transcript(dir: &Path, t: &Transcript) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = transcript_path(dir, &t.question_id);
    let tmp = path.with_extension("jsonl.tmp");
    let mut line = serde_json::to_string(t).expect("transcript serialises");
    line.push('\n');
    fs::write(&tmp, line)?;
    fs::rename(&tmp, &path)?;
    Ok(path)
}

/// All transcripts in `dir`, sorted by question id. Unreadable files are
/// reported with their path.
pub fn read_transcripts(dir: &Path) -> Result<Vec<Transcript>, String> {
    let mut out = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    for entry in entries {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let t: Transcript =
                serde_json::from_str(line).map_err(|e| format!("{}:{}: {e}", path.display(), i + 1))?;
            out.push(t);
        }
    }
    out.sort_by(|a, b| a.question_id.cmp(&b.question_id));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{Message, ProviderConfig, RunConfig};
    use serde_json::json;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let t = Transcript {
            question_id: "Q/1".into(),
            config: RunConfig::new(ProviderConfig::new("http://x", "m")).summary(),
            messages: vec![Message::user("hi")],
            predicted_calls: Vec::new(),
            final_answer: Some(json!([1, "a"])),
            had_error: false,
            turn_count: 1,
            failure: None,
        };
        let path = write_transcript(dir.path(), &t).unwrap();
        assert!(path.ends_with("Q_1.jsonl"));
        assert_eq!(read_transcripts(dir.path()).unwrap(), vec![t]);
    }
}
