//! Compares the sequential and rayon-backed batch judges on a synthetic
//! corpus. Analysis runs once up front; only the judging phase, which is
//! what the `parallel` feature switches, is measured.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qaff::corpus::{parse_conllu, Document, QAInstance};
use qaff::evaluation::{analyze_instance, evaluate_parallel, evaluate_serial, AnalyzedInstance};
use qaff::pipeline::Resources;
use qaff::scoring::FfMode;

fn synthetic_instance(i: usize, resources: &Resources) -> AnalyzedInstance {
    let first = [
        "Alice", "Brian", "Chloe", "David", "Erin", "Felix", "Grace", "Henry", "Isla", "Jonas",
    ];
    let name_first = first[i % first.len()];
    let name_last = ["Archer", "Baker", "Carter", "Dawson", "Ellis"][i % 5];
    let topic = format!("element{i}");
    let question = parse_conllu(&format!(
        "1\tWho\twho\t_\tWP\t_\t2\tnsubj\t_\t_\n\
         2\tdiscovered\tdiscover\t_\tVBD\t_\t0\troot\t_\t_\n\
         3\t{topic}\t{topic}\t_\tNN\t_\t2\tdobj\t_\t_\n\
         4\t?\t?\t_\t.\t_\t2\tpunct\t_\t_\n"
    ))
    .unwrap()
    .remove(0);
    let documents = (0..8)
        .map(|d| {
            let sentence = parse_conllu(&format!(
                "1\t{name_first}\t{name_first}\t_\tNNP\t_\t2\tcompound\t_\tNER=PERSON\n\
                 2\t{name_last}\t{name_last}\t_\tNNP\t_\t3\tnsubj\t_\tNER=PERSON\n\
                 3\tdiscovered\tdiscover\t_\tVBD\t_\t0\troot\t_\t_\n\
                 4\t{topic}\t{topic}\t_\tNN\t_\t3\tdobj\t_\t_\n\
                 5\t.\t.\t_\t.\t_\t3\tpunct\t_\t_\n"
            ))
            .unwrap()
            .remove(0);
            Document {
                doc_id: format!("bench-{i}-d{d}"),
                sentences: vec![sentence; 4],
            }
        })
        .collect();
    let instance = QAInstance {
        id: format!("bench-{i}"),
        question,
        options: Vec::new(),
        gold_answer: format!("{name_first} {name_last}"),
        documents,
    };
    analyze_instance(&instance, resources).unwrap()
}

fn bench_evaluate(c: &mut Criterion) {
    let resources = Resources::builtin();
    let mut group = c.benchmark_group("evaluate");
    for size in [32usize, 128, 512] {
        let analyzed: Vec<AnalyzedInstance> = (0..size)
            .map(|i| synthetic_instance(i, &resources))
            .collect();
        let refs: Vec<&AnalyzedInstance> = analyzed.iter().collect();
        group.bench_with_input(BenchmarkId::new("serial", size), &refs, |b, refs| {
            b.iter(|| evaluate_serial(refs, FfMode::LogProduct, &None, None).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("parallel", size), &refs, |b, refs| {
            b.iter(|| evaluate_parallel(refs, FfMode::LogProduct, &None, None).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_evaluate);
criterion_main!(benches);
