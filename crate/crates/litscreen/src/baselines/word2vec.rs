//! Skip-gram word embeddings with negative sampling, trained from
//! scratch on corpus text.
//!
//! Training is single-threaded and seeded, so a fixed config always
//! yields identical vectors. Article text (title + abstract) forms one
//! sentence per record.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Word2VecConfig {
    /// Embedding dimension.
    pub dimension: usize,
    /// Maximum context window; the effective window per position is
    /// drawn uniformly from 1..=window.
    pub window: usize,
    /// Negative samples per positive pair.
    pub negative: usize,
    pub epochs: usize,
    /// Tokens occurring fewer times are dropped from the vocabulary.
    pub min_count: u64,
    /// Minimum vocabulary size required to train.
    pub min_vocab: usize,
    /// Starting learning rate, decayed linearly to near zero.
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for Word2VecConfig {
    fn default() -> Self {
        Word2VecConfig {
            dimension: 100,
            window: 5,
            negative: 5,
            epochs: 15,
            min_count: 2,
            min_vocab: 2,
            learning_rate: 0.025,
            seed: 1,
        }
    }
}

/// Trained embedding table: token → row of the input-vector matrix.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    index: HashMap<String, usize>,
    tokens: Vec<String>,
    vectors: Vec<f64>,
    pub config: Word2VecConfig,
}

impl EmbeddingModel {
    pub fn dimension(&self) -> usize {
        self.config.dimension
    }

    pub fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        let &row = self.index.get(token)?;
        let d = self.config.dimension;
        Some(&self.vectors[row * d..(row + 1) * d])
    }

    /// Cosine similarity between two vocabulary tokens.
    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let va = self.vector(a)?;
        let vb = self.vector(b)?;
        let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
        let na: f64 = va.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            None
        } else {
            Some(dot / (na * nb))
        }
    }

    /// Write the model as a versioned binary container: magic, format
    /// version, config JSON, token list, then little-endian f64 rows.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        file.write_all(MAGIC)?;
        file.write_all(&FORMAT_VERSION.to_le_bytes())?;
        let config = serde_json::to_vec(&self.config)?;
        file.write_all(&(config.len() as u64).to_le_bytes())?;
        file.write_all(&config)?;
        let tokens = self.tokens.join("\n").into_bytes();
        file.write_all(&(tokens.len() as u64).to_le_bytes())?;
        file.write_all(&tokens)?;
        for value in &self.vectors {
            file.write_all(&value.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
        let bad = |what: &str| Error::Config(format!("embedding container: {what}"));

        let mut magic = [0u8; 4];
        file.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        let mut version = [0u8; 4];
        file.read_exact(&mut version)?;
        if u32::from_le_bytes(version) != FORMAT_VERSION {
            return Err(bad("unsupported version"));
        }
        let config_len = read_u64(&mut file)? as usize;
        let mut config_buf = vec![0u8; config_len];
        file.read_exact(&mut config_buf)?;
        let config: Word2VecConfig = serde_json::from_slice(&config_buf)?;

        let tokens_len = read_u64(&mut file)? as usize;
        let mut tokens_buf = vec![0u8; tokens_len];
        file.read_exact(&mut tokens_buf)?;
        let tokens: Vec<String> = String::from_utf8(tokens_buf)
            .map_err(|_| bad("token list is not UTF-8"))?
            .split('\n')
            .map(str::to_string)
            .collect();

        let mut vectors = vec![0.0f64; tokens.len() * config.dimension];
        let mut buf = [0u8; 8];
        for value in vectors.iter_mut() {
            file.read_exact(&mut buf)?;
            *value = f64::from_le_bytes(buf);
        }
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(EmbeddingModel {
            index,
            tokens,
            vectors,
            config,
        })
    }
}

const MAGIC: &[u8; 4] = b"LSEM";
const FORMAT_VERSION: u32 = 1;

fn read_u64(reader: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    reader.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Train skip-gram embeddings with negative sampling on the corpus
/// titles and abstracts.
pub fn train_word2vec(corpus: &Corpus, config: &Word2VecConfig) -> Result<EmbeddingModel> {
    let sentences: Vec<Vec<String>> = corpus
        .iter()
        .map(|r| {
            let mut tokens = tokenize(&r.title);
            tokens.extend(tokenize(&r.abstract_text));
            tokens
        })
        .collect();

    // vocabulary ordered by (count desc, token asc) for determinism
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for sentence in &sentences {
        for token in sentence {
            *counts.entry(token).or_insert(0) += 1;
        }
    }
    let mut vocab: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= config.min_count)
        .collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    if vocab.len() < config.min_vocab {
        return Err(Error::VocabularyTooSmall {
            size: vocab.len(),
            minimum: config.min_vocab,
        });
    }

    let tokens: Vec<String> = vocab.iter().map(|(t, _)| t.to_string()).collect();
    let index: HashMap<String, usize> = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();

    // unigram^0.75 table for negative sampling
    let cumulative: Vec<f64> = vocab
        .iter()
        .scan(0.0, |acc, (_, c)| {
            *acc += (*c as f64).powf(0.75);
            Some(*acc)
        })
        .collect();
    let cumulative_total = *cumulative.last().expect("vocab is non-empty");

    let d = config.dimension;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut input: Vec<f64> = (0..tokens.len() * d)
        .map(|_| (rng.gen::<f64>() - 0.5) / d as f64)
        .collect();
    let mut output = vec![0.0f64; tokens.len() * d];

    let sentence_ids: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();
    let tokens_per_epoch: usize = sentence_ids.iter().map(Vec::len).sum();
    let total_steps = (tokens_per_epoch * config.epochs).max(1) as f64;

    let mut processed = 0usize;
    let mut gradient = vec![0.0f64; d];
    for _epoch in 0..config.epochs {
        for ids in &sentence_ids {
            for (position, &center) in ids.iter().enumerate() {
                let lr = config.learning_rate
                    * (1.0 - processed as f64 / total_steps).max(1e-4);
                processed += 1;

                let shrink = rng.gen_range(0..config.window);
                let lo = position.saturating_sub(config.window - shrink);
                let hi = (position + config.window - shrink).min(ids.len() - 1);
                for (context_pos, &context) in ids.iter().enumerate().take(hi + 1).skip(lo) {
                    if context_pos == position {
                        continue;
                    }
                    gradient.fill(0.0);
                    for k in 0..=config.negative {
                        let (target, label) = if k == 0 {
                            (center, 1.0)
                        } else {
                            let mut negative = sample_token(&cumulative, cumulative_total, &mut rng);
                            if negative == center {
                                negative = sample_token(&cumulative, cumulative_total, &mut rng);
                            }
                            if negative == center {
                                continue;
                            }
                            (negative, 0.0)
                        };
                        let in_row = &input[context * d..(context + 1) * d];
                        let out_row = &output[target * d..(target + 1) * d];
                        let dot: f64 = in_row.iter().zip(out_row).map(|(a, b)| a * b).sum();
                        let g = (label - sigmoid(dot)) * lr;
                        for i in 0..d {
                            gradient[i] += g * output[target * d + i];
                        }
                        for i in 0..d {
                            output[target * d + i] += g * input[context * d + i];
                        }
                    }
                    for i in 0..d {
                        input[context * d + i] += gradient[i];
                    }
                }
            }
        }
    }

    Ok(EmbeddingModel {
        index,
        tokens,
        vectors: input,
        config: config.clone(),
    })
}

fn sample_token(cumulative: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let r = rng.gen::<f64>() * total;
    cumulative.partition_point(|&c| c < r).min(cumulative.len() - 1)
}
