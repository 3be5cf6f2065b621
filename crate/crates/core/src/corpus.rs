//! Post ingestion and preprocessing, diagnosed-user labelling, control user
//! sampling and dataset splits.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::kg::KnowledgeGraph;
use crate::retrieval::{find_bounded, KeywordLexicon};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPost {
    pub id: String,
    pub author: String,
    pub subreddit: String,
    #[serde(rename = "created_utc")]
    pub created: i64,
    #[serde(rename = "selftext")]
    pub text: String,
}

/// Reads newline-delimited JSON posts. Ids must be unique and timestamps
/// non-negative.
pub fn read_posts(reader: impl BufRead) -> Result<Vec<RawPost>> {
    let mut seen = HashSet::new();
    let mut posts = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::parse("posts", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let post: RawPost =
            serde_json::from_str(&line).map_err(|e| Error::parse(format!("posts line {}", i + 1), e))?;
        if post.created < 0 {
            return Err(Error::Validation(format!("post `{}` has negative created_utc", post.id)));
        }
        if !seen.insert(post.id.clone()) {
            return Err(Error::Validation(format!("duplicate post id `{}`", post.id)));
        }
        posts.push(post);
    }
    Ok(posts)
}

pub fn load_posts(path: impl AsRef<Path>) -> Result<Vec<RawPost>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_posts(std::io::BufReader::new(file))
}

pub fn posts_to_ndjson(posts: &[RawPost]) -> String {
    posts
        .iter()
        .map(|p| serde_json::to_string(p).expect("post serialises") + "\n")
        .collect()
}

// ---------------------------------------------------------------------------
// Cleaning and sentence splitting

/// Index just past the bracket that closes the one at `open`, if any.
fn matching_close(chars: &[char], open: usize, open_ch: char, close_ch: char) -> Option<usize> {
    let mut depth = 0usize;
    for (i, &c) in chars.iter().enumerate().skip(open) {
        if c == open_ch {
            depth += 1;
        } else if c == close_ch {
            depth -= 1;
            if depth == 0 {
                return Some(i + 1);
            }
        }
    }
    None
}

/// Replaces markdown links `[anchor](url)` by their (recursively cleaned)
/// anchor text. Everything else is preserved byte for byte.
pub fn clean_text(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '[' {
            if let Some(after_anchor) = matching_close(&chars, i, '[', ']') {
                if chars.get(after_anchor) == Some(&'(') {
                    if let Some(after_url) = matching_close(&chars, after_anchor, '(', ')') {
                        let anchor: String = chars[i + 1..after_anchor - 1].iter().collect();
                        out.push_str(&clean_text(&anchor));
                        i = after_url;
                        continue;
                    }
                }
            }
        }
        out.push(chars[i]);
        i += 1;
    }
    out
}

pub fn clean_post(post: &RawPost) -> RawPost {
    RawPost {
        text: clean_text(&post.text),
        ..post.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub post_id: String,
    pub index: usize,
    pub text: String,
}

impl Sentence {
    /// `<post_id>:<index>`
    pub fn id(&self) -> String {
        sentence_id(&self.post_id, self.index)
    }
}

pub fn sentence_id(post_id: &str, index: usize) -> String {
    format!("{post_id}:{index}")
}

fn abbreviations() -> &'static HashSet<String> {
    static ABBREV: OnceLock<HashSet<String>> = OnceLock::new();
    ABBREV.get_or_init(|| {
        include_str!("../data/abbreviations.txt")
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    })
}

const REMOVED_SENTINELS: [&str; 2] = ["[removed]", "[deleted]"];

fn is_removed(s: &str) -> bool {
    REMOVED_SENTINELS.iter().any(|r| s.eq_ignore_ascii_case(r))
}

/// Rule-based splitter: sentences end at a run of `.`, `!` or `?` followed by
/// whitespace or end of text (unless the word ending there is a known
/// abbreviation) and at every newline. Fragments are trimmed; empty ones and
/// removal sentinels are dropped.
pub fn split_text(text: &str) -> Vec<String> {
    let abbrev = abbreviations();
    let mut out = Vec::new();
    let mut push = |s: &str| {
        let t = s.trim();
        if !t.is_empty() && !is_removed(t) {
            out.push(t.to_string());
        }
    };
    for line in text.lines() {
        let chars: Vec<char> = line.chars().collect();
        let mut start = 0;
        let mut i = 0;
        while i < chars.len() {
            if matches!(chars[i], '.' | '!' | '?') {
                let mut end = i;
                while end < chars.len() && matches!(chars[end], '.' | '!' | '?') {
                    end += 1;
                }
                while end < chars.len() && matches!(chars[end], '"' | '\'' | ')' | ']' | '\u{201d}') {
                    end += 1;
                }
                let at_break = end == chars.len() || chars[end].is_whitespace();
                if at_break {
                    let word_start = chars[start..i]
                        .iter()
                        .rposition(|c| c.is_whitespace())
                        .map(|p| start + p + 1)
                        .unwrap_or(start);
                    let word: String = chars[word_start..end]
                        .iter()
                        .collect::<String>()
                        .trim_start_matches(['(', '"', '\''])
                        .to_lowercase();
                    let is_abbrev = chars[i] == '.' && end - i == 1 && abbrev.contains(&word);
                    if !is_abbrev {
                        push(&chars[start..end].iter().collect::<String>());
                        start = end;
                    }
                }
                i = end.max(i + 1);
            } else {
                i += 1;
            }
        }
        push(&chars[start..].iter().collect::<String>());
    }
    out
}

pub fn split_sentences(post: &RawPost) -> Vec<Sentence> {
    split_text(&post.text)
        .into_iter()
        .enumerate()
        .map(|(index, text)| Sentence {
            post_id: post.id.clone(),
            index,
            text,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Diagnosed users

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisRule {
    #[serde(rename = "patterns")]
    pub diagnosis_patterns: Vec<String>,
    #[serde(rename = "keywords")]
    pub disease_keywords: BTreeMap<String, Vec<String>>,
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_window() -> usize {
    40
}

impl DiagnosisRule {
    pub fn validate(&self, kg: &KnowledgeGraph) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Validation("diagnosis window must be positive".into()));
        }
        for d in self.disease_keywords.keys() {
            kg.disease(d)?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse("diagnosis rule", e))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosisLabels {
    pub users: BTreeMap<String, BTreeSet<String>>,
    pub diagnostic_posts: BTreeSet<String>,
}

/// Diseases whose keywords occur within `rule.window` characters of a
/// diagnosis pattern in `text`. Distance is measured between the nearest
/// edges of the two matches, in either direction.
pub fn diagnosed_diseases(text: &str, rule: &DiagnosisRule) -> BTreeSet<String> {
    let hay: Vec<char> = text.to_lowercase().chars().collect();
    let mut pattern_spans = Vec::new();
    for p in &rule.diagnosis_patterns {
        let needle: Vec<char> = p.to_lowercase().chars().collect();
        for start in find_bounded(&hay, &needle) {
            pattern_spans.push((start, start + needle.len()));
        }
    }
    let mut found = BTreeSet::new();
    if pattern_spans.is_empty() {
        return found;
    }
    for (disease, keywords) in &rule.disease_keywords {
        'kw: for kw in keywords {
            let needle: Vec<char> = kw.to_lowercase().chars().collect();
            for ks in find_bounded(&hay, &needle) {
                let ke = ks + needle.len();
                for &(ps, pe) in &pattern_spans {
                    let gap = if ks >= pe {
                        ks - pe
                    } else if ps >= ke {
                        ps - ke
                    } else {
                        0
                    };
                    if gap <= rule.window {
                        found.insert(disease.clone());
                        break 'kw;
                    }
                }
            }
        }
    }
    found
}

pub fn label_diagnosed_users(posts: &[RawPost], rule: &DiagnosisRule) -> DiagnosisLabels {
    let mut labels = DiagnosisLabels::default();
    for post in posts {
        let found = diagnosed_diseases(&post.text, rule);
        if !found.is_empty() {
            labels.diagnostic_posts.insert(post.id.clone());
            labels.users.entry(post.author.clone()).or_default().extend(found);
        }
    }
    labels
}

pub fn filter_diagnostic_posts(posts: &[RawPost], diagnostic: &BTreeSet<String>) -> Vec<RawPost> {
    posts.iter().filter(|p| !diagnostic.contains(&p.id)).cloned().collect()
}

/// Seeded uniform sample of `n` users with no activity in any listed
/// subreddit and no mental-health term in any of their posts.
pub fn sample_control_users(
    posts: &[RawPost],
    mh_subreddits: &BTreeSet<String>,
    mh_terms: &KeywordLexicon,
    n: usize,
    seed: u64,
) -> Result<BTreeSet<String>> {
    let subs: HashSet<String> = mh_subreddits.iter().map(|s| s.to_lowercase()).collect();
    let mut eligible: BTreeMap<&str, bool> = BTreeMap::new();
    for p in posts {
        let bad = subs.contains(&p.subreddit.to_lowercase()) || mh_terms.matches(&p.text);
        *eligible.entry(&p.author).or_insert(true) &= !bad;
    }
    let pool: Vec<&str> = eligible.into_iter().filter(|(_, ok)| *ok).map(|(u, _)| u).collect();
    if n > pool.len() {
        return Err(Error::Insufficient(format!(
            "requested {n} control users but only {} are eligible",
            pool.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, pool.len(), n)
        .into_iter()
        .map(|i| pool[i].to_string())
        .collect())
}

// ---------------------------------------------------------------------------
// Splits

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "validation" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::parse("split", format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitAssignment {
    /// Assignment in the order ids were supplied.
    pub entries: Vec<(String, Split)>,
}

impl SplitAssignment {
    pub fn get(&self, id: &str) -> Option<Split> {
        self.entries.iter().find(|(i, _)| i == id).map(|(_, s)| *s)
    }

    pub fn ids(&self, split: Split) -> Vec<String> {
        self.entries
            .iter()
            .filter(|(_, s)| *s == split)
            .map(|(i, _)| i.clone())
            .collect()
    }

    pub fn counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for (_, s) in &self.entries {
            c[*s as usize] += 1;
        }
        c
    }

    pub fn lookup(&self) -> HashMap<&str, Split> {
        self.entries.iter().map(|(i, s)| (i.as_str(), *s)).collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (id, s) in &self.entries {
            writeln!(out, "{id}\t{}", s.as_str()).unwrap();
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (id, split) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse("splits", format!("bad line `{line}`")))?;
            entries.push((id.to_string(), Split::parse(split.trim())?));
        }
        Ok(Self { entries })
    }
}

/// Largest-remainder apportionment of `n` items to `ratios`.
fn apportion(n: usize, ratios: [u32; 3]) -> [usize; 3] {
    let total: u64 = ratios.iter().map(|&r| u64::from(r)).sum();
    let mut counts = [0usize; 3];
    let mut rem = [(0u64, 0usize); 3];
    for (k, &r) in ratios.iter().enumerate() {
        let num = n as u64 * u64::from(r);
        counts[k] = (num / total) as usize;
        rem[k] = (num % total, k);
    }
    let mut left = n - counts.iter().sum::<usize>();
    rem.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, k) in rem.iter() {
        if left == 0 {
            break;
        }
        counts[k] += 1;
        left -= 1;
    }
    counts
}

/// Seeded shuffle and proportional cut. With `strata`, each class is shuffled
/// and cut separately (classes in sorted order, one sequential generator).
pub fn split_dataset(
    ids: &[String],
    ratios: [u32; 3],
    seed: u64,
    strata: Option<&HashMap<String, String>>,
) -> Result<SplitAssignment> {
    if ids.is_empty() {
        return Err(Error::InvalidArgument("cannot split an empty id list".into()));
    }
    if ratios.iter().any(|&r| r == 0) {
        return Err(Error::InvalidArgument("split ratios must be positive".into()));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
        return Err(Error::Validation(format!("duplicate id `{dup}` in split input")));
    }

    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, id) in ids.iter().enumerate() {
        let class = match strata {
            Some(map) => map
                .get(id)
                .map(String::as_str)
                .ok_or_else(|| Error::Validation(format!("id `{id}` has no stratum")))?,
            None => "",
        };
        groups.entry(class).or_default().push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assigned = vec![Split::Train; ids.len()];
    for members in groups.values_mut() {
        members.shuffle(&mut rng);
        let counts = apportion(members.len(), ratios);
        let mut cursor = 0;
        for (split, &count) in Split::ALL.iter().zip(&counts) {
            for &i in &members[cursor..cursor + count] {
                assigned[i] = *split;
            }
            cursor += count;
        }
    }
    Ok(SplitAssignment {
        entries: ids.iter().cloned().zip(assigned).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn post(id: &str, author: &str, sub: &str, text: &str) -> RawPost {
        RawPost {
            id: id.into(),
            author: author.into(),
            subreddit: sub.into(),
            created: 0,
            text: text.into(),
        }
    }

    #[test]
    fn link_flattening() {
        assert_eq!(clean_text("see [help](http://x.y)"), "see help");
        assert_eq!(clean_text("no links here"), "no links here");
        assert_eq!(clean_text("[a[b]](u)"), "a[b]");
        assert_eq!(clean_text("[Removed] stays"), "[Removed] stays");
        assert_eq!(clean_text("[x](http://a.b/(c)) tail"), "x tail");
        assert_eq!(clean_text("[unclosed](oops"), "[unclosed](oops");
    }

    #[test]
    fn sentence_splitting() {
        assert_eq!(split_text("I am sad. I sleep badly."), ["I am sad.", "I sleep badly."]);
        assert!(split_text("").is_empty());
        assert_eq!(split_text("e.g. this stays one sentence"), ["e.g. this stays one sentence"]);
        assert_eq!(split_text("Really?! Yes.\nnext line"), ["Really?!", "Yes.", "next line"]);
        assert_eq!(split_text("[Removed]\nreal text"), ["real text"]);
        assert_eq!(split_text("ok. [deleted]"), ["ok."]);
        assert_eq!(split_text("version 2.5 is out"), ["version 2.5 is out"]);
        assert_eq!(split_text("He said \"stop.\" Then left."), ["He said \"stop.\"", "Then left."]);
        let s = split_sentences(&post("p1", "u", "r", "One. Two."));
        assert_eq!(s[1].id(), "p1:1");
    }

    fn rule() -> DiagnosisRule {
        DiagnosisRule {
            diagnosis_patterns: vec!["diagnosed with".into()],
            disease_keywords: [
                ("ocd".to_string(), vec!["ocd".to_string()]),
                ("ptsd".to_string(), vec!["ptsd".to_string()]),
            ]
            .into(),
            window: 40,
        }
    }

    #[test]
    fn window_matching() {
        let posts = vec![post("p1", "alice", "r", "I was diagnosed with ocd last year")];
        let labels = label_diagnosed_users(&posts, &rule());
        assert_eq!(labels.users["alice"], ["ocd".to_string()].into());
        assert!(labels.diagnostic_posts.contains("p1"));

        // gap of exactly 40 characters matches, 41 does not
        let at = |gap: usize| format!("diagnosed with{}ocd", " ".repeat(gap));
        assert!(diagnosed_diseases(&at(40), &rule()).contains("ocd"));
        assert!(diagnosed_diseases(&at(41), &rule()).is_empty());
        // keyword before the pattern counts too
        let before = format!("ocd{}  diagnosed with", " x".repeat(19));
        assert_eq!(before.find("diagnosed").unwrap() - 3, 40);
        assert!(diagnosed_diseases(&before, &rule()).contains("ocd"));
    }

    #[test]
    fn two_patterns_two_diseases() {
        // "diagnosed with" at 0..14, ptsd at 15..19; second pattern at 68..82,
        // ocd at 83..86. ptsd is 49 chars before the second pattern and ocd is
        // 69 chars after the first, so each pairing is only matched locally.
        let text = format!(
            "diagnosed with ptsd{}diagnosed with ocd",
            " and then a long story about many other things.. "
        );
        assert_eq!(text.find("ocd").unwrap(), 83);
        let found = diagnosed_diseases(&text, &rule());
        assert_eq!(found, ["ocd".to_string(), "ptsd".to_string()].into());
    }

    #[test]
    fn diagnostic_filtering() {
        let posts: Vec<RawPost> = (0..10).map(|i| post(&format!("p{i}"), "u", "r", "x")).collect();
        let flagged: BTreeSet<String> = ["p3".to_string(), "p7".to_string()].into();
        let kept = filter_diagnostic_posts(&posts, &flagged);
        assert_eq!(kept.len(), 8);
        assert!(kept.windows(2).all(|w| w[0].id < w[1].id));
        assert_eq!(filter_diagnostic_posts(&posts, &BTreeSet::new()), posts);
        let all: BTreeSet<String> = posts.iter().map(|p| p.id.clone()).collect();
        assert!(filter_diagnostic_posts(&posts, &all).is_empty());
    }

    #[test]
    fn filtering_never_adds_labels() {
        let posts = vec![
            post("a", "u1", "r", "I was diagnosed with ocd"),
            post("b", "u1", "r", "my friend was diagnosed with ptsd"),
            post("c", "u1", "r", "nothing"),
        ];
        let before = label_diagnosed_users(&posts, &rule());
        let rest = filter_diagnostic_posts(&posts, &before.diagnostic_posts);
        let after = label_diagnosed_users(&rest, &rule());
        for (u, ds) in &after.users {
            assert!(ds.is_subset(&before.users[u]));
        }
    }

    #[test]
    fn control_sampling() {
        let posts = vec![
            post("1", "mh_user", "depression", "hello"),
            post("2", "term_user", "cooking", "my anxiety is bad"),
            post("3", "ok1", "cooking", "pasta"),
            post("4", "ok2", "games", "zelda"),
            post("5", "ok3", "games", "mario"),
        ];
        let subs: BTreeSet<String> = ["Depression".to_string()].into();
        let terms = KeywordLexicon::new(["anxiety"]);
        let s1 = sample_control_users(&posts, &subs, &terms, 2, 5).unwrap();
        let s2 = sample_control_users(&posts, &subs, &terms, 2, 5).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.len(), 2);
        assert!(!s1.contains("mh_user") && !s1.contains("term_user"));
        assert!(sample_control_users(&posts, &subs, &terms, 4, 5).is_err());
    }

    #[test]
    fn split_counts() {
        let ids: Vec<String> = (0..100).map(|i| format!("x{i}")).collect();
        assert_eq!(split_dataset(&ids, [5, 1, 4], 1, None).unwrap().counts(), [50, 10, 40]);
        assert_eq!(split_dataset(&ids[..10], [5, 1, 4], 1, None).unwrap().counts(), [5, 1, 4]);
        assert!(split_dataset(&[], [5, 1, 4], 1, None).is_err());
        assert!(split_dataset(&ids, [5, 0, 4], 1, None).is_err());
    }

    #[test]
    fn stratified_split_within_one() {
        let ids: Vec<String> = (0..137).map(|i| format!("x{i}")).collect();
        let strata: HashMap<String, String> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), ["a", "b", "c"][i % 7 % 3].to_string()))
            .collect();
        let split = split_dataset(&ids, [5, 1, 4], 3, Some(&strata)).unwrap();
        for class in ["a", "b", "c"] {
            let members: Vec<&String> = ids.iter().filter(|id| strata[*id] == class).collect();
            let n = members.len() as f64;
            for (k, share) in [0.5, 0.1, 0.4].iter().enumerate() {
                let got = members.iter().filter(|id| split.get(id) == Some(Split::ALL[k])).count() as f64;
                assert!((got - n * share).abs() <= 1.0, "class {class} split {k}: {got} vs {}", n * share);
            }
        }
    }

    proptest! {
        #[test]
        fn clean_is_idempotent(s in "[a-z\\[\\]() ]{0,40}") {
            let once = clean_text(&s);
            prop_assert_eq!(clean_text(&once), once);
        }

        #[test]
        fn split_is_partition(n in 1usize..200, seed in 0u64..1000) {
            let ids: Vec<String> = (0..n).map(|i| format!("i{i}")).collect();
            let split = split_dataset(&ids, [5, 1, 4], seed, None).unwrap();
            prop_assert_eq!(split.entries.len(), n);
            prop_assert_eq!(split.counts().iter().sum::<usize>(), n);
            let got: Vec<&String> = split.entries.iter().map(|(i, _)| i).collect();
            prop_assert_eq!(got, ids.iter().collect::<Vec<_>>());
        }
    }
}
