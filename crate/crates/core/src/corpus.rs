//! Dataset loading, text preprocessing, vocabularies and category subsampling.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Document {
    pub id: String,
    pub label: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Split::Train => f.write_str("train"),
            Split::Test => f.write_str("test"),
        }
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::invalid(format!("unknown split {other:?}"))),
        }
    }
}

/// Tokenized documents of one split, with the ordered set of category labels.
#[derive(Debug, Clone)]
pub struct LabeledCorpus {
    pub documents: Vec<Document>,
    pub split: Split,
    pub categories: Vec<String>,
}

impl LabeledCorpus {
    /// Builds a corpus, deriving the sorted category set from the document labels.
    pub fn new(documents: Vec<Document>, split: Split) -> Result<Self> {
        let mut categories = BTreeSet::new();
        for doc in &documents {
            if doc.label.is_empty() {
                return Err(Error::invalid(format!(
                    "document {} has an empty label",
                    doc.id
                )));
            }
            if doc.tokens.iter().any(|t| t.is_empty()) {
                return Err(Error::invalid(format!(
                    "document {} has an empty token",
                    doc.id
                )));
            }
            categories.insert(doc.label.clone());
        }
        if categories.is_empty() {
            return Err(Error::invalid("corpus has no categories"));
        }
        Ok(LabeledCorpus {
            documents,
            split,
            categories: categories.into_iter().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(|d| d.tokens.len()).sum()
    }

    pub fn category_index(&self, label: &str) -> Option<usize> {
        self.categories
            .binary_search_by(|c| c.as_str().cmp(label))
            .ok()
    }

    /// Category indices aligned with `documents`.
    pub fn label_indices(&self) -> Vec<usize> {
        self.documents
            .iter()
            .map(|d| self.category_index(&d.label).expect("label in categories"))
            .collect()
    }

    /// Number of documents per category, aligned with `categories`.
    pub fn category_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.categories.len()];
        for i in self.label_indices() {
            sizes[i] += 1;
        }
        sizes
    }

    /// Content digest over ids, labels and tokens, used as a cache key.
    pub fn fingerprint(&self) -> String {
        let mut buf = Vec::new();
        buf.extend_from_slice(self.split.to_string().as_bytes());
        for doc in &self.documents {
            buf.extend_from_slice(doc.id.as_bytes());
            buf.push(0);
            buf.extend_from_slice(doc.label.as_bytes());
            buf.push(0);
            for t in &doc.tokens {
                buf.extend_from_slice(t.as_bytes());
                buf.push(b' ');
            }
            buf.push(b'\n');
        }
        util::hex_digest(&buf)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessOptions {
    pub stem: bool,
    pub stopwords: BTreeSet<String>,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            stem: true,
            stopwords: BTreeSet::new(),
        }
    }
}

impl PreprocessOptions {
    /// Reads a whitespace-separated stopword list.
    pub fn load_stopwords(path: &Path) -> Result<BTreeSet<String>> {
        let text = util::read_to_string(path)?;
        Ok(text.split_whitespace().map(|w| w.to_lowercase()).collect())
    }
}

/// Lowercase, split on non-letters, drop single characters and stopwords, optionally Porter-stem.
pub fn preprocess(raw: &str, options: &PreprocessOptions) -> Vec<String> {
    Preprocessor::new(options).run(raw)
}

/// Preprocessor that memoizes stems across calls.
pub struct Preprocessor<'a> {
    options: &'a PreprocessOptions,
    stems: HashMap<String, String>,
}

impl<'a> Preprocessor<'a> {
    pub fn new(options: &'a PreprocessOptions) -> Self {
        Preprocessor {
            options,
            stems: HashMap::new(),
        }
    }

    pub fn run(&mut self, raw: &str) -> Vec<String> {
        let mut out = Vec::new();
        for piece in raw.split(|c: char| !c.is_alphabetic()) {
            if piece.chars().nth(1).is_none() {
                continue;
            }
            let word = piece.to_lowercase();
            if self.options.stopwords.contains(&word) {
                continue;
            }
            let token = if self.options.stem {
                match self.stems.get(&word) {
                    Some(s) => s.clone(),
                    None => {
                        let s = porter_stemmer::stem(&word);
                        self.stems.insert(word, s.clone());
                        s
                    }
                }
            } else {
                word
            };
            // stemming can shrink a word to a single character
            if token.chars().nth(1).is_some() {
                out.push(token);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetFormat {
    /// `<root>/<category>/<doc-file>`; headers up to the first blank line are dropped.
    NewsgroupsDirs,
    /// One `label<TAB>text` document per line.
    LabelPerLine,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "newsgroupsdirs" | "dirs" => Ok(DatasetFormat::NewsgroupsDirs),
            "labelperline" | "lines" => Ok(DatasetFormat::LabelPerLine),
            other => Err(Error::invalid(format!("unknown dataset format {other:?}"))),
        }
    }
}

/// Loads and preprocesses a dataset split.
///
/// Documents that preprocess to no tokens are dropped, as are exact duplicates
/// (same token sequence) after their first occurrence.
pub fn load_dataset(
    path: &Path,
    format: DatasetFormat,
    split: Split,
    options: &PreprocessOptions,
) -> Result<LabeledCorpus> {
    let raw = match format {
        DatasetFormat::NewsgroupsDirs => read_newsgroups_dirs(path)?,
        DatasetFormat::LabelPerLine => read_label_per_line(path)?,
    };
    let mut pre = Preprocessor::new(options);
    let mut seen: HashSet<Vec<String>> = HashSet::new();
    let mut documents = Vec::with_capacity(raw.len());
    let mut duplicates = 0usize;
    for (id, label, text) in raw {
        let tokens = pre.run(&text);
        if tokens.is_empty() {
            continue;
        }
        if !seen.insert(tokens.clone()) {
            duplicates += 1;
            continue;
        }
        documents.push(Document { id, label, tokens });
    }
    if documents.is_empty() {
        return Err(Error::EmptyCorpus(path.to_path_buf()));
    }
    if duplicates > 0 {
        log::info!(
            "{}: dropped {duplicates} duplicate documents",
            path.display()
        );
    }
    LabeledCorpus::new(documents, split)
}

fn strip_news_header(text: &str) -> &str {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        offset += line.len();
        if line.trim().is_empty() {
            return &text[offset..];
        }
    }
    text
}

fn read_newsgroups_dirs(root: &Path) -> Result<Vec<(String, String, String)>> {
    let mut categories: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    categories.sort();
    let mut out = Vec::new();
    for dir in categories {
        let label = dir.file_name().unwrap().to_string_lossy().into_owned();
        let mut files: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        for file in files {
            let bytes = fs::read(&file).map_err(|e| Error::io(&file, e))?;
            let text = String::from_utf8_lossy(&bytes);
            let body = strip_news_header(&text).to_string();
            let name = file.file_name().unwrap().to_string_lossy();
            out.push((format!("{label}/{name}"), label.clone(), body));
        }
    }
    Ok(out)
}

fn read_label_per_line(path: &Path) -> Result<Vec<(String, String, String)>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8_lossy(&bytes);
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (label, body) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, line_no, "missing tab between label and text"))?;
        let label = label.trim();
        if label.is_empty() {
            return Err(Error::parse(path, line_no, "empty label"));
        }
        out.push((
            format!("line-{line_no}"),
            label.to_string(),
            body.to_string(),
        ));
    }
    Ok(out)
}

/// Writes an already-tokenized corpus as `id<TAB>label<TAB>tok tok ...` lines.
pub fn write_tokenized(corpus: &LabeledCorpus, path: &Path) -> Result<()> {
    let mut s = String::new();
    for d in &corpus.documents {
        s.push_str(&d.id);
        s.push('\t');
        s.push_str(&d.label);
        s.push('\t');
        s.push_str(&d.tokens.join(" "));
        s.push('\n');
    }
    util::write_atomic(path, s.as_bytes())
}

pub fn read_tokenized(path: &Path, split: Split) -> Result<LabeledCorpus> {
    let text = util::read_to_string(path)?;
    let mut documents = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, '\t');
        let (Some(id), Some(label), Some(tokens)) = (parts.next(), parts.next(), parts.next())
        else {
            return Err(Error::parse(
                path,
                i + 1,
                "expected id<TAB>label<TAB>tokens",
            ));
        };
        documents.push(Document {
            id: id.to_string(),
            label: label.to_string(),
            tokens: tokens.split_whitespace().map(str::to_string).collect(),
        });
    }
    if documents.is_empty() {
        return Err(Error::EmptyCorpus(path.to_path_buf()));
    }
    LabeledCorpus::new(documents, split)
}

/// Word ids are contiguous and ordered by descending training frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    total_tokens: u64,
}

impl Vocabulary {
    /// Builds from (word, count) pairs already in id order.
    pub fn from_counts(entries: Vec<(String, u64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary(0));
        }
        let mut index = HashMap::with_capacity(entries.len());
        let mut words = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for (i, (w, c)) in entries.into_iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary word {w:?}")));
            }
            words.push(w);
            counts.push(c);
        }
        let total_tokens = counts.iter().sum();
        Ok(Vocabulary {
            words,
            counts,
            index,
            total_tokens,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Maps a document to in-vocabulary ids, dropping unknown tokens.
    pub fn encode(&self, tokens: &[String]) -> Vec<u32> {
        tokens.iter().filter_map(|t| self.id(t)).collect()
    }

    /// Short identifier of the word list and counts.
    pub fn fingerprint(&self) -> String {
        let mut buf = Vec::new();
        for (w, c) in self.words.iter().zip(&self.counts) {
            buf.extend_from_slice(w.as_bytes());
            buf.extend_from_slice(&c.to_le_bytes());
        }
        util::hex_digest(&buf)[..16].to_string()
    }

    /// `word<TAB>count` per line; id = line number.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = String::new();
        for (w, c) in self.words.iter().zip(&self.counts) {
            s.push_str(w);
            s.push('\t');
            s.push_str(&c.to_string());
            s.push('\n');
        }
        util::write_atomic(path, s.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = util::read_to_string(path)?;
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let (w, c) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected word<TAB>count"))?;
            let c = c
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::parse(path, i + 1, format!("bad count {c:?}")))?;
            entries.push((w.to_string(), c));
        }
        Vocabulary::from_counts(entries)
    }
}

/// Words with training frequency ≥ `min_count`, ids by descending count then lexicographic.
pub fn build_vocabulary(corpus: &LabeledCorpus, min_count: u64) -> Result<Vocabulary> {
    if corpus.split != Split::Train {
        return Err(Error::invalid(
            "vocabulary must be built from the training split",
        ));
    }
    if min_count < 1 {
        return Err(Error::invalid("min_count must be at least 1"));
    }
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for doc in &corpus.documents {
        for t in &doc.tokens {
            *freq.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut entries: Vec<(String, u64)> = freq
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(w, c)| (w.to_string(), c))
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyVocabulary(min_count));
    }
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Vocabulary::from_counts(entries)
}

/// Keeps only `keep` categories and a seeded ⌈fraction·n⌉ sample of each.
///
/// Each category is sampled from its own RNG stream, so the documents picked for
/// a category do not depend on which other categories are kept. Output preserves
/// the input document order.
pub fn restrict_categories(
    corpus: &LabeledCorpus,
    keep: &[String],
    seed: u64,
    fraction: f64,
) -> Result<LabeledCorpus> {
    if keep.is_empty() {
        return Err(Error::invalid("no categories to keep"));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "fraction {fraction} outside (0, 1]"
        )));
    }
    for k in keep {
        if corpus.category_index(k).is_none() {
            return Err(Error::invalid(format!("category {k:?} not in corpus")));
        }
    }
    let keep_set: HashSet<&str> = keep.iter().map(String::as_str).collect();
    let mut by_category: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, d) in corpus.documents.iter().enumerate() {
        if keep_set.contains(d.label.as_str()) {
            by_category.entry(d.label.as_str()).or_default().push(i);
        }
    }
    let mut selected = Vec::new();
    for cat in &corpus.categories {
        let Some(members) = by_category.get(cat.as_str()) else {
            continue;
        };
        let n = members.len();
        let take = ((fraction * n as f64).ceil() as usize).min(n);
        if take == n {
            selected.extend_from_slice(members);
        } else {
            let mut rng = util::rng_for(seed, cat);
            selected.extend(
                index::sample(&mut rng, n, take)
                    .into_iter()
                    .map(|j| members[j]),
            );
        }
    }
    if selected.is_empty() {
        return Err(Error::invalid("restriction leaves no documents"));
    }
    selected.sort_unstable();
    let documents = selected
        .into_iter()
        .map(|i| corpus.documents[i].clone())
        .collect();
    LabeledCorpus::new(documents, corpus.split)
}

/// The `n` categories with the most documents; ties broken by name.
pub fn largest_categories(corpus: &LabeledCorpus, n: usize) -> Vec<String> {
    let sizes = corpus.category_sizes();
    let mut order: Vec<usize> = (0..corpus.categories.len()).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let mut picked: Vec<String> = order
        .into_iter()
        .take(n)
        .map(|i| corpus.categories[i].clone())
        .collect();
    picked.sort();
    picked
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, label: &str, tokens: &[&str]) -> Document {
        Document {
            id: id.into(),
            label: label.into(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn no_stem() -> PreprocessOptions {
        PreprocessOptions {
            stem: false,
            stopwords: BTreeSet::new(),
        }
    }

    #[test]
    fn preprocess_drops_stopwords_and_single_chars() {
        let opts = PreprocessOptions {
            stem: false,
            stopwords: ["the".to_string()].into_iter().collect(),
        };
        assert_eq!(preprocess("The CAT, a cat!", &opts), vec!["cat", "cat"]);
    }

    #[test]
    fn preprocess_empty() {
        assert!(preprocess("", &PreprocessOptions::default()).is_empty());
    }

    #[test]
    fn preprocess_stems() {
        let opts = PreprocessOptions::default();
        assert_eq!(preprocess("Running runs", &opts), vec!["run", "run"]);
    }

    #[test]
    fn preprocess_splits_on_digits_and_punctuation() {
        assert_eq!(
            preprocess("abc123def x-ray e-mail", &no_stem()),
            vec!["abc", "def", "ray", "mail"]
        );
    }

    #[test]
    fn porter_reference_vocabulary_sample() {
        // pairs from the reference voc.txt / output.txt distributed with Porter's algorithm
        let pairs = [
            ("caresses", "caress"),
            ("ponies", "poni"),
            ("relational", "relat"),
            ("conditional", "condit"),
            ("generalization", "gener"),
            ("hopeful", "hope"),
            ("agreed", "agre"),
            ("motoring", "motor"),
            ("sized", "size"),
            ("electrical", "electr"),
            ("adjustable", "adjust"),
            ("happy", "happi"),
        ];
        for (word, stem) in pairs {
            assert_eq!(porter_stemmer::stem(word), stem, "{word}");
        }
    }

    #[test]
    fn label_per_line_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.txt");
        // single letters are removed by preprocessing, so two-letter words stand in
        fs::write(&path, "a\txx yy\nb\tzz\n").unwrap();
        let c = load_dataset(&path, DatasetFormat::LabelPerLine, Split::Train, &no_stem()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.categories, vec!["a", "b"]);
    }

    #[test]
    fn label_per_line_missing_tab_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.txt");
        fs::write(&path, "a\tgood text\nbroken line\n").unwrap();
        let err =
            load_dataset(&path, DatasetFormat::LabelPerLine, Split::Train, &no_stem()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn zero_documents_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.txt");
        fs::write(&path, "a\t1 2 3\n\n").unwrap();
        assert!(matches!(
            load_dataset(&path, DatasetFormat::LabelPerLine, Split::Train, &no_stem()),
            Err(Error::EmptyCorpus(_))
        ));
    }

    #[test]
    fn unreadable_path_is_error() {
        let r = load_dataset(
            Path::new("/nonexistent/corpus"),
            DatasetFormat::NewsgroupsDirs,
            Split::Train,
            &no_stem(),
        );
        assert!(matches!(r, Err(Error::Io { .. })));
    }

    #[test]
    fn newsgroups_dirs_strip_headers_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        for (cat, files) in [
            (
                "alt.atheism",
                vec![("1", "From: someone\nSubject: hello\n\nbody words here\n")],
            ),
            (
                "sci.space",
                vec![
                    ("2", "From: x\n\norbit rocket launch\n"),
                    ("3", "From: y\n\norbit rocket launch\n"),
                ],
            ),
        ] {
            fs::create_dir(dir.path().join(cat)).unwrap();
            for (name, text) in files {
                fs::write(dir.path().join(cat).join(name), text).unwrap();
            }
        }
        let c = load_dataset(
            dir.path(),
            DatasetFormat::NewsgroupsDirs,
            Split::Train,
            &no_stem(),
        )
        .unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.documents[0].tokens, vec!["body", "words", "here"]);
        assert_eq!(c.documents[0].id, "alt.atheism/1");
        assert_eq!(c.categories, vec!["alt.atheism", "sci.space"]);
    }

    #[test]
    fn vocabulary_counts_and_cutoff() {
        let c = LabeledCorpus::new(vec![doc("1", "x", &["a", "a", "b"])], Split::Train).unwrap();
        let v = build_vocabulary(&c, 1).unwrap();
        assert_eq!(v.id("a"), Some(0));
        assert_eq!(v.id("b"), Some(1));
        assert_eq!(v.counts(), &[2, 1]);
        let v2 = build_vocabulary(&c, 2).unwrap();
        assert_eq!(v2.len(), 1);
        assert_eq!(v2.id("a"), Some(0));
        assert!(matches!(
            build_vocabulary(&c, 3),
            Err(Error::EmptyVocabulary(3))
        ));
    }

    #[test]
    fn vocabulary_ties_are_lexicographic() {
        let c = LabeledCorpus::new(vec![doc("1", "x", &["zz", "yy", "aa", "yy"])], Split::Train)
            .unwrap();
        let v = build_vocabulary(&c, 1).unwrap();
        assert_eq!(v.words(), &["yy", "aa", "zz"]);
    }

    #[test]
    fn vocabulary_requires_train_split() {
        let c = LabeledCorpus::new(vec![doc("1", "x", &["a"])], Split::Test).unwrap();
        assert!(build_vocabulary(&c, 1).is_err());
    }

    #[test]
    fn vocabulary_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = LabeledCorpus::new(vec![doc("1", "x", &["aa", "aa", "bb"])], Split::Train).unwrap();
        let v = build_vocabulary(&c, 1).unwrap();
        let path = dir.path().join("vocab.tsv");
        v.write(&path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "aa\t2\nbb\t1\n");
        assert_eq!(Vocabulary::read(&path).unwrap(), v);
    }

    fn sample_corpus() -> LabeledCorpus {
        let mut docs = Vec::new();
        for i in 0..30 {
            let label = ["red", "green", "blue"][i % 3];
            docs.push(doc(&format!("d{i}"), label, &["tok"]));
        }
        LabeledCorpus::new(docs, Split::Train).unwrap()
    }

    #[test]
    fn restrict_two_categories() {
        let c = sample_corpus();
        let keep = vec!["red".to_string(), "blue".to_string()];
        let r = restrict_categories(&c, &keep, 1, 1.0).unwrap();
        assert_eq!(r.categories, vec!["blue", "red"]);
        assert_eq!(r.len(), 20);
    }

    #[test]
    fn restrict_identity() {
        let c = sample_corpus();
        let r = restrict_categories(&c, &c.categories, 9, 1.0).unwrap();
        assert_eq!(r.documents, c.documents);
    }

    #[test]
    fn restrict_fraction_is_deterministic() {
        let c = sample_corpus();
        let ids = |r: &LabeledCorpus| r.documents.iter().map(|d| d.id.clone()).collect::<Vec<_>>();
        let a = restrict_categories(&c, &c.categories, 42, 0.5).unwrap();
        let b = restrict_categories(&c, &c.categories, 42, 0.5).unwrap();
        assert_eq!(ids(&a), ids(&b));
        assert_eq!(a.len(), 15);
        let other = restrict_categories(&c, &c.categories, 43, 0.5).unwrap();
        assert_ne!(ids(&a), ids(&other));
    }

    #[test]
    fn restrict_errors() {
        let c = sample_corpus();
        assert!(restrict_categories(&c, &[], 1, 1.0).is_err());
        assert!(restrict_categories(&c, &["purple".to_string()], 1, 1.0).is_err());
        assert!(restrict_categories(&c, &c.categories, 1, 0.0).is_err());
    }

    #[test]
    fn largest_categories_by_size() {
        let mut docs = Vec::new();
        for (label, n) in [("a", 3), ("b", 5), ("c", 1), ("d", 5)] {
            for i in 0..n {
                docs.push(doc(&format!("{label}{i}"), label, &["tok"]));
            }
        }
        let c = LabeledCorpus::new(docs, Split::Train).unwrap();
        assert_eq!(largest_categories(&c, 2), vec!["b", "d"]);
        assert_eq!(largest_categories(&c, 3), vec!["a", "b", "d"]);
    }
}
