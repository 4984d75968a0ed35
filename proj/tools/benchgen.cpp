// Writes the synthetic evaluation corpus to disk: one corpus JSON and one
// references JSON per generated topic. Handy for exercising the CLI end to
// end without real document collections.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cesumm/benchmark.hpp"

namespace fs = std::filesystem;

static void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cesumm::ValidationError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

int main(int argc, char** argv) {
    CLI::App app{"Synthetic benchmark corpus generator"};
    fs::path out;
    std::size_t topics = 20;
    std::uint64_t seed = 0x5eedc0de;
    app.add_option("--out", out, "Output directory")->required();
    app.add_option("--topics", topics, "Number of topics");
    app.add_option("--seed", seed, "Generator seed");
    CLI11_PARSE(app, argc, argv);

    try {
        cesumm::bench::BenchmarkSpec spec;
        spec.topics = topics;
        spec.seed = seed;
        const auto benchmark = cesumm::bench::make_benchmark(spec);
        fs::create_directories(out / "corpus");
        fs::create_directories(out / "references");
        for (const auto& topic : benchmark) {
            const std::string name = topic.corpus.topic.topic_id + ".json";
            write_json(out / "corpus" / name, topic.corpus_json);
            write_json(out / "references" / name, cesumm::bench::references_json(topic));
        }
        std::cout << "wrote " << benchmark.size() << " topics to " << out.string() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
