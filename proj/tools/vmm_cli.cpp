#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vmm/artifact.hpp"
#include "vmm/classify.hpp"
#include "vmm/eval.hpp"
#include "vmm/io.hpp"
#include "vmm/registry.hpp"
#include "vmm/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vmm;

namespace {

constexpr int exit_usage = 1;
constexpr int exit_data = 2;
constexpr int exit_numeric = 3;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string alg;
    std::string params;
    std::string grid;
    std::string mode = "bytes";
    std::string alphabet;
    int precision = 2;
};

void add_data_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--mode", c.mode, "Input format")->check(CLI::IsMember({"bytes", "tokens", "midi-csv"}));
    cmd->add_option("--alphabet", c.alphabet, "Alphabet file (tokens mode), one token per line");
}

void add_model_options(CLI::App* cmd, Common& c, bool alg_required = true) {
    auto* a = cmd->add_option("--alg", c.alg, "Algorithm")
                  ->check(CLI::IsMember({"lz78", "lzms", "ppmc", "ctw", "bictw", "dectw", "pst", "pststar"}));
    if (alg_required) a->required();
    auto* p = cmd->add_option("--params", c.params, "Parameters k=v,...");
    cmd->add_option("--grid", c.grid, "Grid: table8, table9 or a JSON file")->excludes(p);
}

std::string fixed(double v, int precision) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << v;
    return out.str();
}

std::string full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Grid grid_from_json(const json& j) {
    Grid out;
    if (j.is_array()) {
        for (const auto& e : j) out.push_back(e.get<Params>());
    } else if (j.is_object()) {
        std::vector<std::pair<std::string, std::vector<double>>> axes;
        for (const auto& [k, v] : j.items())
            axes.push_back({k, v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()}});
        out = cartesian(axes);
    } else {
        throw DataError("grid file must hold an object of value lists or an array of parameter objects");
    }
    if (out.empty()) throw DataError("empty grid");
    return out;
}

/// --params gives a one-entry grid, --grid a named or file grid, neither the
/// algorithm's default grid for `set`.
Grid resolve_grid(Algorithm alg, const Common& c, GridSet set) {
    if (!c.params.empty()) return {parse_params(c.params)};
    if (c.grid.empty()) return default_grid(alg, set);
    if (c.grid == "table8") return default_grid(alg, GridSet::prediction);
    if (c.grid == "table9") return default_grid(alg, GridSet::classification);
    try {
        const json j = json::parse(read_file(c.grid));
        if (j.is_object() && j.contains(to_string(alg))) return grid_from_json(j.at(to_string(alg)));
        return grid_from_json(j);
    } catch (const json::exception& e) {
        throw DataError(c.grid + ": " + e.what());
    }
}

Alphabet alphabet_for(const Common& c) { return mode_alphabet(parse_mode(c.mode), c.alphabet); }

struct Inputs {
    std::vector<fs::path> files;
    std::vector<Sequence> sequences;
    std::uint64_t digest = 0xcbf29ce484222325ULL;
};

Inputs load_inputs(const std::vector<std::string>& paths, const Common& c, const Alphabet& alphabet) {
    Inputs in;
    const InputMode mode = parse_mode(c.mode);
    for (const auto& p : paths)
        for (const auto& f : list_inputs(p)) {
            const std::string content = read_file(f);
            in.digest = fnv1a(content, in.digest);
            Sequence s = decode_input(content, mode, alphabet);
            if (s.empty()) throw DataError(f.string() + ": empty input");
            in.files.push_back(f);
            in.sequences.push_back(std::move(s));
        }
    return in;
}

std::string hex(std::uint64_t v) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << v;
    return out.str();
}

/// Context text to symbols: characters when every token is one character,
/// whitespace-separated tokens otherwise.
Sequence parse_context(const std::string& text, const Alphabet& a) {
    bool single = true;
    for (const auto& t : a.tokens()) single = single && t.size() == 1;
    if (single) return a.encode(text);
    Sequence out;
    std::istringstream ss(text);
    std::string tok;
    while (ss >> tok) out.push_back(a.index(tok));
    return out;
}

std::string render(const Sequence& s, const Alphabet& a) {
    bool single = true;
    for (const auto& t : a.tokens()) single = single && t.size() == 1;
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!single && i) out += ' ';
        out += a.symbol(s[i]);
    }
    return out;
}

json tuned_json(const TunedModel& t) {
    return {{"selected_index", t.selected_index},
            {"fold_losses", t.fold_losses},
            {"median_loss", t.median_loss}};
}

int cmd_train(const Common& c, const std::vector<std::string>& paths, const std::string& out) {
    const Alphabet alphabet = alphabet_for(c);
    const Algorithm alg = parse_algorithm(c.alg);
    Inputs in = load_inputs(paths, c, alphabet);
    Artifact a;
    a.algorithm = alg;
    a.alphabet = alphabet;
    a.metadata = {{"input_digest", "fnv1a64:" + hex(in.digest)}, {"timestamp", utc_timestamp()}};
    json files = json::array();
    for (const auto& f : in.files) files.push_back(f.filename().string());
    a.metadata["inputs"] = files;
    if (!c.grid.empty()) {
        TunedModel t = cv_tune(in.sequences, alphabet.size(), alg, resolve_grid(alg, c, GridSet::prediction));
        a.params = t.selected;
        a.predictor = std::move(t.predictor);
        a.metadata["tuning"] = tuned_json(t);
    } else {
        a.params = effective_params(alg, parse_params(c.params));
        a.predictor = make_predictor(alg, alphabet.size(), a.params);
        a.predictor->train(in.sequences);
    }
    save_artifact(a, out);
    std::cout << "trained " << c.alg << " (" << format_params(a.params) << ") on " << in.files.size()
              << " input(s) -> " << out << '\n';
    return 0;
}

int cmd_eval(const Common& c, const std::vector<std::string>& paths) {
    const Alphabet alphabet = alphabet_for(c);
    const Algorithm alg = parse_algorithm(c.alg);
    const Grid grid = resolve_grid(alg, c, GridSet::prediction);
    Inputs in = load_inputs(paths, c, alphabet);
    std::vector<double> losses;
    std::size_t width = 11;
    for (const auto& f : in.files) width = std::max(width, f.filename().string().size());
    std::cout << std::left << std::setw(static_cast<int>(width)) << "file" << "  " << c.alg << "  params\n";
    for (std::size_t i = 0; i < in.files.size(); ++i) {
        auto r = half_split_eval(in.sequences[i], alphabet.size(), alg, grid);
        losses.push_back(r.loss);
        std::cout << std::left << std::setw(static_cast<int>(width)) << in.files[i].filename().string() << "  "
                  << fixed(r.loss, c.precision) << "  " << format_params(r.tuned.selected) << '\n';
    }
    std::cout << std::left << std::setw(static_cast<int>(width)) << "Average±SEM" << "  "
              << fixed(mean(losses), c.precision) << "±" << fixed(sem(losses), c.precision) << '\n';
    return 0;
}

int cmd_tune(const Common& c, const std::vector<std::string>& paths) {
    const Alphabet alphabet = alphabet_for(c);
    const Algorithm alg = parse_algorithm(c.alg);
    const Grid grid = resolve_grid(alg, c, GridSet::prediction);
    Inputs in = load_inputs(paths, c, alphabet);
    TunedModel t = cv_tune(in.sequences, alphabet.size(), alg, grid);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double m = t.grid_medians[g];
        std::cout << (g == t.selected_index ? "* " : "  ") << format_params(grid[g]) << "  "
                  << (std::isnan(m) ? std::string("skipped") : fixed(m, c.precision)) << '\n';
    }
    std::cout << "selected " << format_params(t.selected) << " median " << fixed(t.median_loss, c.precision)
              << " folds";
    for (double l : t.fold_losses) std::cout << ' ' << fixed(l, c.precision);
    std::cout << '\n';
    return 0;
}

int cmd_prob(const std::string& model, const std::string& symbol, const std::string& context) {
    Artifact a = load_artifact(model);
    const Sequence ctx = parse_context(context, a.alphabet);
    const Symbol sym = a.alphabet.index(symbol);
    std::cout << full(a.predictor->prob(sym, ctx)) << '\n';
    return 0;
}

int cmd_parse(const Common& c, const std::vector<std::string>& paths, std::size_t m, std::size_t s) {
    const Alphabet alphabet = alphabet_for(c);
    Inputs in = load_inputs(paths, c, alphabet);
    const LzTrie trie = lzms_parse(in.sequences, alphabet.size(), LzMsParams{m, s});
    std::string line;
    for (const auto& p : trie.phrases()) {
        if (!line.empty()) line += '|';
        line += render(p, alphabet);
    }
    std::cout << "LZ78(" << m << ',' << s << ") " << trie.phrase_count() << " phrases\n" << line << '\n';
    return 0;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        Params p = parse_params("v=" + item);
        out.push_back(p.at("v"));
    }
    if (out.empty()) throw UsageError("empty value list");
    return out;
}

int cmd_ablate(const Common& c, const std::vector<std::string>& paths, const std::string& mg, const std::string& sg) {
    const Alphabet alphabet = alphabet_for(c);
    Inputs in = load_inputs(paths, c, alphabet);
    const auto m_grid = parse_list(mg);
    const auto s_grid = parse_list(sg);
    std::cout << "file  M-alone (M)  S-alone (S)  joint (M,S)\n";
    for (std::size_t i = 0; i < in.files.size(); ++i) {
        auto r = lzms_ablation(in.sequences[i], alphabet.size(), m_grid, s_grid);
        std::cout << in.files[i].filename().string() << "  " << fixed(r.m_loss, c.precision) << " (" << r.m_best
                  << ")  " << fixed(r.s_loss, c.precision) << " (" << r.s_best << ")  "
                  << fixed(r.joint_loss, c.precision) << " (" << r.joint_m << ',' << r.joint_s << ")\n";
    }
    return 0;
}

LabeledCorpus load_classes(const std::vector<std::string>& dirs, const Common& c, const Alphabet& alphabet,
                           std::uint64_t* digest = nullptr) {
    if (dirs.size() < 2) throw DataError("classification needs at least two class directories");
    LabeledCorpus corpus;
    for (const auto& d : dirs) {
        if (!fs::is_directory(d)) throw DataError(d + " is not a directory");
        Inputs in = load_inputs({d}, c, alphabet);
        if (digest) *digest = fnv1a(hex(in.digest), *digest);
        corpus.classes.push_back(std::move(in.sequences));
    }
    return corpus;
}

std::string class_name(const std::string& dir) {
    fs::path p(dir);
    if (p.filename().empty()) p = p.parent_path();
    return p.filename().string();
}

int cmd_classify_train(const Common& c, const std::vector<std::string>& dirs, const std::string& out) {
    const Alphabet alphabet = alphabet_for(c);
    const Algorithm alg = parse_algorithm(c.alg);
    std::uint64_t digest = 0xcbf29ce484222325ULL;
    LabeledCorpus corpus = load_classes(dirs, c, alphabet, &digest);
    std::vector<Params> chosen;
    if (!c.grid.empty()) {
        const Grid grid = resolve_grid(alg, c, GridSet::classification);
        for (const auto& cls : corpus.classes) chosen.push_back(cv_tune(cls, alphabet.size(), alg, grid).selected);
    } else {
        chosen.assign(corpus.classes.size(), effective_params(alg, parse_params(c.params)));
    }
    WtaClassifier clf = train_class_models(corpus, alphabet.size(), alg, chosen);
    json models = json::array();
    json names = json::array();
    for (std::size_t i = 0; i < clf.models.size(); ++i) {
        Artifact a;
        a.algorithm = alg;
        a.alphabet = alphabet;
        a.params = clf.params[i];
        a.predictor = std::move(clf.models[i]);
        models.push_back(artifact_to_json(a));
        names.push_back(class_name(dirs[i]));
    }
    json j = {{"format", "vmm-classifier"},
              {"version", artifact_version},
              {"classes", names},
              {"models", models},
              {"metadata", {{"input_digest", "fnv1a64:" + hex(digest)}, {"timestamp", utc_timestamp()}}}};
    std::ofstream f(out, std::ios::binary);
    if (!f) throw DataError("cannot write " + out);
    f << j.dump(1) << '\n';
    std::cout << "trained " << clf.params.size() << "-class " << c.alg << " classifier -> " << out << '\n';
    return 0;
}

void print_report(const std::vector<std::string>& names, const CvClassificationReport& r, int precision) {
    std::cout << "class  error%  ±SEM\n";
    for (std::size_t i = 0; i < names.size(); ++i)
        std::cout << names[i] << "  " << fixed(100 * r.class_error[i], precision) << "  ±"
                  << fixed(100 * r.class_error_sem[i], precision) << '\n';
    std::cout << "Average  " << fixed(100 * r.macro, precision) << "  ±" << fixed(100 * r.macro_sem, precision) << '\n';
    std::cout << "W. Average  " << fixed(100 * r.weighted, precision) << "  ±"
              << fixed(100 * r.weighted_sem, precision) << '\n';
}

int cmd_classify(const Common& c, const std::vector<std::string>& inputs, const std::string& model) {
    if (model.empty()) {
        if (c.alg.empty()) throw UsageError("classify needs --alg (cross-validation) or --model (prediction)");
        const Alphabet alphabet = alphabet_for(c);
        const Algorithm alg = parse_algorithm(c.alg);
        LabeledCorpus corpus = load_classes(inputs, c, alphabet);
        const Grid grid = resolve_grid(alg, c, GridSet::classification);
        auto report = classification_cv(corpus, alphabet.size(), alg, grid);
        std::vector<std::string> names;
        for (const auto& d : inputs) names.push_back(class_name(d));
        print_report(names, report, c.precision);
        return 0;
    }
    json j;
    try {
        j = json::parse(read_file(model));
    } catch (const json::exception& e) {
        throw DataError(model + ": " + e.what());
    }
    WtaClassifier clf;
    std::vector<std::string> names;
    Alphabet alphabet;
    try {
        if (j.at("format").get<std::string>() != "vmm-classifier") throw DataError(model + " is not a classifier");
        names = j.at("classes").get<std::vector<std::string>>();
        for (const auto& m : j.at("models")) {
            Artifact a = artifact_from_json(m);
            alphabet = a.alphabet;
            clf.algorithm = a.algorithm;
            clf.params.push_back(a.params);
            clf.models.push_back(std::move(a.predictor));
        }
    } catch (const json::exception& e) {
        throw DataError(model + ": " + e.what());
    }
    clf.alphabet_size = alphabet.size();
    Common data = c;
    Inputs in = load_inputs(inputs, data, alphabet);
    for (std::size_t i = 0; i < in.files.size(); ++i)
        std::cout << in.files[i].string() << '\t' << names.at(wta_classify(clf, in.sequences[i])) << '\n';
    return 0;
}

int cmd_inspect(const std::string& model) {
    Artifact a = load_artifact(model);
    std::cout << "algorithm " << to_string(a.algorithm) << "\nparams " << format_params(a.params) << "\nalphabet "
              << a.alphabet.size() << " symbols\n";
    if (auto* lz = dynamic_cast<const LzPredictor*>(a.predictor.get())) {
        std::string line;
        for (const auto& p : lz->trie().phrases()) {
            if (!line.empty()) line += '|';
            line += render(p, a.alphabet);
        }
        std::cout << "phrases " << line << '\n';
    }
    std::cout << "metadata " << a.metadata.dump() << '\n';
    return 0;
}

int cmd_synth(const std::string& out, std::uint64_t seed, std::size_t per_class, std::size_t length) {
    std::mt19937_64 rng(seed);
    const LabeledCorpus corpus = two_source_corpus(per_class, length, rng);
    const Alphabet letters = Alphabet::from_chars("abcd");
    for (std::size_t c = 0; c < corpus.classes.size(); ++c) {
        const fs::path dir = fs::path(out) / ("class" + std::to_string(c));
        fs::create_directories(dir);
        for (std::size_t i = 0; i < corpus.classes[c].size(); ++i) {
            std::ostringstream name;
            name << "seq" << std::setw(4) << std::setfill('0') << i << ".txt";
            std::ofstream f(dir / name.str(), std::ios::binary);
            if (!f) throw DataError("cannot write " + (dir / name.str()).string());
            f << letters.decode(corpus.classes[c][i]);
        }
    }
    std::cout << "wrote " << corpus.size() << " sequences under " << out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable-order Markov model prediction and classification"};
    app.require_subcommand(1);
    Common c;
    std::vector<std::string> inputs;
    std::string out, model, symbol, context, m_grid = "0,2,4,6,8", s_grid = "0,2,4,6,8,10,12,14,16,18";
    std::size_t back_shift = 0, shifts = 0, per_class = 50, length = 100;
    std::uint64_t seed = 1;

    auto* train = app.add_subcommand("train", "Train a model and save it");
    train->add_option("inputs", inputs, "Input files or directories")->required();
    add_model_options(train, c);
    add_data_options(train, c);
    train->add_option("--out,-o", out, "Model file")->required();

    auto* eval = app.add_subcommand("eval", "Half-split evaluation, one row per input");
    eval->add_option("inputs", inputs, "Input files or directories")->required();
    add_model_options(eval, c);
    add_data_options(eval, c);
    eval->add_option("--precision", c.precision, "Digits after the decimal point");

    auto* tune = app.add_subcommand("tune", "Cross-validated grid search");
    tune->add_option("inputs", inputs, "Input files or directories")->required();
    add_model_options(tune, c);
    add_data_options(tune, c);
    tune->add_option("--precision", c.precision, "Digits after the decimal point");

    auto* prob = app.add_subcommand("prob", "Print P(symbol | context)");
    prob->add_option("model", model, "Model file")->required();
    prob->add_option("--symbol", symbol, "Symbol to score")->required();
    prob->add_option("--context", context, "Preceding symbols");

    auto* parse = app.add_subcommand("parse", "Print the LZ-MS dictionary in parse order");
    parse->add_option("inputs", inputs, "Input files or directories")->required();
    parse->add_option("--M", back_shift, "Back-shift");
    parse->add_option("--S", shifts, "Input shifts");
    add_data_options(parse, c);

    auto* ablate = app.add_subcommand("ablate", "LZ-MS M-alone / S-alone / joint comparison");
    ablate->add_option("inputs", inputs, "Input files or directories")->required();
    ablate->add_option("--M-grid", m_grid, "Comma-separated M values");
    ablate->add_option("--S-grid", s_grid, "Comma-separated S values");
    add_data_options(ablate, c);
    ablate->add_option("--precision", c.precision, "Digits after the decimal point");

    auto* ctrain = app.add_subcommand("classify-train", "Train one model per class directory");
    ctrain->add_option("classes", inputs, "Class directories")->required();
    add_model_options(ctrain, c);
    add_data_options(ctrain, c);
    ctrain->add_option("--out,-o", out, "Classifier file")->required();

    auto* classify = app.add_subcommand("classify", "Cross-validated report over class directories, or "
                                                    "label inputs with --model");
    classify->add_option("inputs", inputs, "Class directories, or inputs with --model")->required();
    add_model_options(classify, c, false);
    add_data_options(classify, c);
    classify->add_option("--model", model, "Classifier file");
    classify->add_option("--precision", c.precision, "Digits after the decimal point");

    auto* inspect = app.add_subcommand("inspect", "Describe a model file");
    inspect->add_option("model", model, "Model file")->required();

    auto* synth = app.add_subcommand("synth", "Write a two-class synthetic Markov corpus");
    synth->add_option("--out,-o", out, "Output directory")->required();
    synth->add_option("--seed", seed, "Random seed");
    synth->add_option("--per-class", per_class, "Sequences per class");
    synth->add_option("--length", length, "Sequence length");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (c.precision < 0 || c.precision > 17) throw UsageError("--precision must be within 0..17");
        if (*train) return cmd_train(c, inputs, out);
        if (*eval) return cmd_eval(c, inputs);
        if (*tune) return cmd_tune(c, inputs);
        if (*prob) return cmd_prob(model, symbol, context);
        if (*parse) return cmd_parse(c, inputs, back_shift, shifts);
        if (*ablate) return cmd_ablate(c, inputs, m_grid, s_grid);
        if (*ctrain) return cmd_classify_train(c, inputs, out);
        if (*classify) return cmd_classify(c, inputs, model);
        if (*inspect) return cmd_inspect(model);
        if (*synth) return cmd_synth(out, seed, per_class, length);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data;
    }
    return exit_usage;
}
