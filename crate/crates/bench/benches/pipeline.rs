use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use psysym_core::classifier::{fit_tfidf, train_relevance, MaskMode, RelevanceData, TfidfConfig, TrainConfig};
use psysym_core::embed::{hash_embed, EmbeddingStore};
use psysym_core::mdd::ConvAggregator;
use psysym_core::retrieval::{lsh_dedup, select_candidates, DedupParams, MinHasher};
use psysym_core::synth::{self, RelevanceBenchConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn embedding(c: &mut Criterion) {
    let text = "I have not slept properly in weeks and I wake up at 4am every night";
    c.bench_function("hash_embed_256", |b| b.iter(|| hash_embed(black_box(text), 256, 7)));
}

fn retrieval(c: &mut Criterion) {
    let kg = synth::world_kg();
    let dim = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut store = EmbeddingStore::new(dim).unwrap();
    for s in kg.symptoms() {
        for i in 0..s.sub_symptoms.len() {
            store.insert(s.sub_symptom_id(i), unit(&mut rng, dim)).unwrap();
        }
    }
    let sentences: Vec<(String, Vec<f64>)> = (0..5000).map(|i| (format!("s{i}"), unit(&mut rng, dim))).collect();
    let disease = synth::disease_ids()[0].clone();
    c.bench_function("select_candidates_5000", |b| {
        b.iter(|| select_candidates(black_box(&sentences), &kg, &disease, &store, 300).unwrap())
    });

    let corpus = synth::retrieval_corpus(0, 100, 900, 0.02);
    let candidates: Vec<(String, String)> = corpus.sentences.clone();
    let hasher = MinHasher::new(128, 5, 0).unwrap();
    c.bench_function("minhash_signature", |b| b.iter(|| hasher.signature(black_box(&candidates[0].1))));
    c.bench_function("lsh_dedup_1000", |b| {
        b.iter(|| lsh_dedup(black_box(&candidates), &DedupParams::default()).unwrap())
    });
}

fn training(c: &mut Criterion) {
    let bench = synth::relevance_benchmark(0, &RelevanceBenchConfig::default());
    let all: Vec<usize> = (0..bench.sentences.len()).collect();
    let texts = bench.texts(&all);
    let vectorizer = fit_tfidf(&texts, &TfidfConfig::default()).unwrap();
    let data = RelevanceData::new(vectorizer.transform_all(&texts), bench.label_mask(&all), bench.is_control(&all)).unwrap();
    let config = TrainConfig { epochs: 10, ..Default::default() };
    let mut group = c.benchmark_group("train_relevance_10_epochs");
    group.sample_size(10);
    for mode in MaskMode::ALL {
        group.bench_function(format!("{mode:?}"), |b| {
            b.iter(|| train_relevance(black_box(&data), &config, mode, None).unwrap())
        });
    }
    group.finish();

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let in_dim = synth::symptom_ids().len();
    let net = ConvAggregator::new(&[3, 5, 7], 16, in_dim, &mut rng).unwrap();
    let seq: Vec<Vec<f64>> = (0..256).map(|_| (0..in_dim).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
    c.bench_function("conv_loss_grad_256_posts", |b| {
        b.iter_batched(
            || vec![0.0; net.params.len()],
            |mut grad| net.loss_grad(black_box(&seq), 1.0, 1.0, &mut grad),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, embedding, retrieval, training);
criterion_main!(benches);
