#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "quirkprint/classifier.hpp"
#include "quirkprint/corpus.hpp"
#include "quirkprint/distance.hpp"

namespace qp = quirkprint;

namespace {

// Full-scale corpus shape: 523 vectors in 2 contexts.
constexpr std::size_t kAttributes = 1046;

qp::SignatureDataset random_signatures(std::size_t rows, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto schema = qp::numbered_schema(kAttributes);
    qp::SignatureDataset ds(schema);
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<qp::Outcome> row(kAttributes);
        for (auto& o : row) o = qp::kAllOutcomes[rng() % 3];
        auto sig = qp::make_signature(schema, std::move(row), "b" + std::to_string(r));
        sig.family = qp::kAllFamilies[rng() % 6];
        ds.add(std::move(sig));
    }
    return ds;
}

void BM_Mhd(benchmark::State& state) {
    auto ds = random_signatures(2, 1);
    for (auto _ : state) benchmark::DoNotOptimize(qp::mhd(ds[0], ds[1]));
}
BENCHMARK(BM_Mhd);

void BM_DistanceMatrix(benchmark::State& state) {
    auto ds = random_signatures(77, 2);
    for (auto _ : state) {
        qp::DistanceMatrix m(ds, static_cast<unsigned>(state.range(0)));
        benchmark::DoNotOptimize(m);
    }
}
BENCHMARK(BM_DistanceMatrix)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_InduceTree(benchmark::State& state) {
    auto ds = qp::LabeledDataset::from_signatures(random_signatures(72, 3));
    for (auto _ : state) benchmark::DoNotOptimize(qp::induce_tree(ds));
}
BENCHMARK(BM_InduceTree)->Unit(benchmark::kMillisecond);

void BM_RenderTestPage(benchmark::State& state) {
    qp::Corpus corpus({{1, qp::VectorSource::Html5Sec, qp::PayloadFormat::Base64,
                        "<script src=\"data:text/javascript;base64,{{PAYLOAD}}\"></script>", ""}});
    std::string payload = qp::base64_encode(std::string(400, 'x'));
    qp::TestCase tc{1, 2, 1};
    for (auto _ : state) benchmark::DoNotOptimize(qp::render_test_page(tc, corpus, payload));
}
BENCHMARK(BM_RenderTestPage);

}  // namespace

BENCHMARK_MAIN();
