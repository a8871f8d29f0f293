//! Turning annotation records into NND tests: group by context, assign
//! quality, then emit every comparable (higher tier, lower tier) pair.

use std::collections::{BTreeMap, HashMap};

use sha2::{Digest, Sha256};

use crate::error::{NndError, Result};
use crate::model::{AnnotationRecord, Candidate, NndTest};
use crate::normalize::NormalizationConfig;
use crate::quality::{quality_of_label, QualityMapping};

/// Checks record invariants against a mapping. Indices in errors are
/// positions in `records`.
pub fn validate_records(
    records: &[AnnotationRecord],
    mapping: &QualityMapping,
    norm: &NormalizationConfig,
) -> Result<()> {
    for (index, r) in records.iter().enumerate() {
        let invalid = |reason: &str| NndError::InvalidRecord {
            index,
            reason: reason.to_string(),
        };
        if r.context_id.is_empty() {
            return Err(invalid("empty context_id"));
        }
        if r.candidate_id.is_empty() {
            return Err(invalid("empty candidate_id"));
        }
        if norm.display(&r.candidate_text).is_empty() {
            return Err(invalid("candidate_text is empty after normalization"));
        }
        mapping
            .resolve_label(r)
            .map_err(|e| NndError::InvalidRecord {
                index,
                reason: e.to_string(),
            })?;
    }
    Ok(())
}

/// Partitions records by `context_id`. Groups come back sorted by context id
/// and keep input order within a group.
pub fn group_by_context(
    records: &[AnnotationRecord],
) -> Result<BTreeMap<String, Vec<&AnnotationRecord>>> {
    let mut seen: HashMap<(&str, &str), usize> = HashMap::with_capacity(records.len());
    let mut groups: BTreeMap<String, Vec<&AnnotationRecord>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        if let Some(first) = seen.insert((&r.context_id, &r.candidate_id), i) {
            return Err(NndError::DuplicateRecord {
                context_id: r.context_id.clone(),
                candidate_id: r.candidate_id.clone(),
                first,
                second: i,
            });
        }
        groups.entry(r.context_id.clone()).or_default().push(r);
    }
    Ok(groups)
}

/// First 16 hex digits of SHA-256 over the length-prefixed identity fields.
pub fn test_id(
    context_id: &str,
    high_candidate_id: &str,
    low_candidate_id: &str,
    attribute: Option<&str>,
) -> String {
    let mut hasher = Sha256::new();
    for field in [context_id, high_candidate_id, low_candidate_id] {
        hasher.update((field.len() as u64).to_le_bytes());
        hasher.update(field.as_bytes());
    }
    match attribute {
        Some(a) => {
            hasher.update([1u8]);
            hasher.update((a.len() as u64).to_le_bytes());
            hasher.update(a.as_bytes());
        }
        None => hasher.update([0u8]),
    }
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

struct Graded<'a> {
    record: &'a AnnotationRecord,
    label: String,
    tier: i64,
    category: Option<String>,
    dedup_key: String,
}

/// Emits one test per ordered pair `(a, b)` in the group where `a` has the
/// higher tier, the labels are comparable and the normalized texts differ.
/// Output is sorted by test id.
pub fn generate_pairs(
    group: &[&AnnotationRecord],
    mapping: &QualityMapping,
    norm: &NormalizationConfig,
) -> Result<Vec<NndTest>> {
    let graded = group
        .iter()
        .map(|&record| {
            let label = mapping.resolve_label(record)?;
            let q = quality_of_label(&label, mapping)?;
            Ok(Graded {
                record,
                label,
                tier: q.tier,
                category: q.category,
                dedup_key: norm.dedup_key(&record.candidate_text),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut tests = Vec::new();
    for high in &graded {
        for low in &graded {
            if high.tier <= low.tier
                || !mapping.comparable(&high.label, &low.label)
                || high.dedup_key == low.dedup_key
            {
                continue;
            }
            // below the top tier, so the mapping guarantees a category
            let Some(category) = low.category.clone() else {
                continue;
            };
            let attribute = high
                .record
                .attribute
                .clone()
                .or_else(|| low.record.attribute.clone());
            tests.push(NndTest {
                test_id: test_id(
                    &high.record.context_id,
                    &high.record.candidate_id,
                    &low.record.candidate_id,
                    attribute.as_deref(),
                ),
                context_id: high.record.context_id.clone(),
                context_text: high.record.context_text.clone(),
                high_candidate: candidate(high.record, norm),
                low_candidate: candidate(low.record, norm),
                error_category: category,
                attribute,
            });
        }
    }
    tests.sort_by(|a, b| a.test_id.cmp(&b.test_id));
    Ok(tests)
}

fn candidate(r: &AnnotationRecord, norm: &NormalizationConfig) -> Candidate {
    Candidate {
        candidate_id: r.candidate_id.clone(),
        text: norm.display(&r.candidate_text),
        model_id: r.model_id.clone(),
    }
}

/// Validates, splits records into attribute streams, groups each stream by
/// context and generates pairs. The suite is sorted by test id.
pub fn compile_suite(
    records: &[AnnotationRecord],
    mapping: &QualityMapping,
    norm: &NormalizationConfig,
) -> Result<Vec<NndTest>> {
    validate_records(records, mapping, norm)?;

    // duplicates are reported with positions in the caller's slice
    let mut seen: HashMap<(Option<&str>, &str, &str), usize> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        let key = (
            r.attribute.as_deref(),
            r.context_id.as_str(),
            r.candidate_id.as_str(),
        );
        if let Some(first) = seen.insert(key, i) {
            return Err(NndError::DuplicateRecord {
                context_id: r.context_id.clone(),
                candidate_id: r.candidate_id.clone(),
                first,
                second: i,
            });
        }
    }

    let mut streams: BTreeMap<Option<&str>, Vec<AnnotationRecord>> = BTreeMap::new();
    for r in records {
        streams
            .entry(r.attribute.as_deref())
            .or_default()
            .push(r.clone());
    }

    let mut suite = Vec::new();
    for stream in streams.values() {
        for group in group_by_context(stream)?.values() {
            suite.extend(generate_pairs(group, mapping, norm)?);
        }
    }
    suite.sort_by(|a, b| a.test_id.cmp(&b.test_id));
    Ok(suite)
}
