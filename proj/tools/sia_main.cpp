// Command-line surface for the shape-routed adapter pipeline: synthetic data
// generation, dataset splitting, training, evaluation, gradient checking, and
// the adapter-count ablation.
//
// Exit codes: 0 success, 1 validation failure, 2 I/O failure, 3 failed check.

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sia/containers.hpp"
#include "sia/evaluator.hpp"
#include "sia/trainer.hpp"

namespace fs = std::filesystem;
using namespace sia;

namespace {

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

std::string timestamp_line() {
    std::time_t now = std::time(nullptr);
    char buf[64];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return std::string("# generated: ") + buf + "\n";
}

std::string echo_block(const ConfigEcho& echo) {
    std::string out = "configuration:\n";
    for (const auto& [k, v] : echo) out += "  " + k + " = " + v + "\n";
    return out;
}

std::string opt_str(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("na");
}

void ensure_parent_dir(const std::string& path) {
    const fs::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + p.parent_path().string() + "'");
    }
}

std::vector<double> parse_boundary_list(const std::string& text) {
    std::vector<double> interior;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        const std::string tok = text.substr(start, comma - start);
        if (tok.empty()) throw ValidationError("empty boundary in '" + text + "'");
        interior.push_back(parse_double(tok));
        start = comma + 1;
        if (comma == text.size()) break;
    }
    std::vector<double> full;
    full.push_back(0.0);
    for (double b : interior) full.push_back(b);
    full.push_back(std::numeric_limits<double>::infinity());
    return full;
}

std::string boundaries_text(const BinPartition& part, const char* sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < part.boundaries().size(); ++i) {
        if (i) out += sep;
        out += format_double(part.boundaries()[i]);
    }
    return out;
}

// ---------------------------------------------------------------- gen-synth

struct GenSynthArgs {
    std::string out_dataset, out_text_bank;
    SynthConfig cfg;
    std::string kind = "rotation";
};

int run_gen_synth(GenSynthArgs& a) {
    a.cfg.kind = a.kind == "rotation" ? SynthConfig::Deformation::rotation
                                      : SynthConfig::Deformation::general_linear;
    SynthResult res = generate_synthetic(a.cfg);
    ensure_parent_dir(a.out_dataset);
    ensure_parent_dir(a.out_text_bank);
    save_dataset(res.dataset, a.out_dataset);
    save_text_bank(res.text_bank, a.out_text_bank);
    std::printf("wrote %s (%zu samples, %zu classes) and %s\n", a.out_dataset.c_str(),
                res.dataset.samples.size(), res.dataset.num_classes(),
                a.out_text_bank.c_str());
    return 0;
}

// -------------------------------------------------------------------- split

struct SplitArgs {
    std::string dataset, out_train, out_eval;
    double fraction = 0.8;
    std::uint64_t seed = 1;
    std::size_t stratify_bins = 0;
};

int run_split(SplitArgs& a) {
    const Dataset ds = load_dataset(a.dataset);
    BinPartition part;
    const BinPartition* partp = nullptr;
    if (a.stratify_bins > 0) {
        part = BinPartition::geometric(a.stratify_bins);
        partp = &part;
    }
    SplitResult res = split_train_eval(ds, a.fraction, a.seed, partp);
    for (const std::string& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    ensure_parent_dir(a.out_train);
    ensure_parent_dir(a.out_eval);
    save_dataset(res.train, a.out_train);
    save_dataset(res.eval, a.out_eval);
    std::printf("wrote %s (%zu samples) and %s (%zu samples)\n", a.out_train.c_str(),
                res.train.samples.size(), a.out_eval.c_str(), res.eval.samples.size());
    return 0;
}

// -------------------------------------------------------------------- train

struct BankArgs {
    std::size_t adapters = 4;
    std::size_t hidden_dim = 0; // 0 = dim / 4
    double lambda = 0.2;
    std::string boundaries; // comma-separated interior boundaries; empty = geometric
};

BinPartition partition_from_args(const BankArgs& a) {
    if (!a.boundaries.empty()) {
        BinPartition part((parse_boundary_list(a.boundaries)));
        if (part.bins() != a.adapters)
            throw ValidationError("boundary list implies " + std::to_string(part.bins()) +
                                  " bins but --adapters is " + std::to_string(a.adapters));
        return part;
    }
    return BinPartition::geometric(a.adapters);
}

struct TrainArgs {
    std::string dataset, text_bank, out_bank, out_report;
    BankArgs bank;
    TrainConfig cfg;
    std::string optimizer = "adamw";
    std::string loss = "label-ce";
    ClassifierConfig clf;
    bool no_normalize = false;
};

void apply_enum_args(TrainConfig& cfg, const std::string& optimizer, const std::string& loss) {
    cfg.optimizer = optimizer == "sgd" ? OptimizerKind::sgd : OptimizerKind::adamw;
    cfg.loss = loss == "all-class-mean" ? LossKind::all_class_mean : LossKind::label_ce;
}

ConfigEcho train_echo(const TrainArgs& a, const AdapterBank& bank) {
    return {
        {"dataset", a.dataset},
        {"text_bank", a.text_bank},
        {"out_bank", a.out_bank},
        {"out_report", a.out_report},
        {"adapters", std::to_string(bank.size())},
        {"hidden_dim", std::to_string(bank.hidden_dim)},
        {"lambda", format_double(bank.lambda)},
        {"boundaries", boundaries_text(bank.partition)},
        {"epochs", std::to_string(a.cfg.epochs)},
        {"base_lr", format_double(a.cfg.base_lr)},
        {"lr_decay_factor", format_double(a.cfg.lr_decay_factor)},
        {"lr_decay_after_epoch", std::to_string(a.cfg.lr_decay_after_epoch)},
        {"batch_size", std::to_string(a.cfg.batch_size)},
        {"weight_decay", format_double(a.cfg.weight_decay)},
        {"optimizer", a.optimizer},
        {"loss", a.loss},
        {"seed", std::to_string(a.cfg.seed)},
        {"tau", format_double(a.clf.tau)},
        {"normalize", a.no_normalize ? "false" : "true"},
    };
}

std::string train_report_text(const ConfigEcho& echo, const TrainReport& rep,
                              const BinPartition& part) {
    std::string out = timestamp_line();
    out += "train report\n";
    out += echo_block(echo);
    out += "epoch_losses:\n";
    for (std::size_t e = 0; e < rep.epoch_mean_loss.size(); ++e)
        out += "  epoch " + std::to_string(e + 1) + " mean_loss " +
               format_double(rep.epoch_mean_loss[e]) + "\n";
    out += "bins:\n";
    for (std::size_t b = 0; b < rep.bin_counts.size(); ++b) {
        out += "  bin " + std::to_string(b) + " lower " +
               format_double(part.boundaries()[b]) + " upper " +
               format_double(part.boundaries()[b + 1]) + " count " +
               std::to_string(rep.bin_counts[b]) + " train_accuracy " +
               opt_str(rep.bin_train_accuracy[b]) + "\n";
    }
    out += "empty_bins:";
    if (rep.empty_bins.empty()) {
        out += " none";
    } else {
        for (std::size_t b : rep.empty_bins) out += " " + std::to_string(b);
    }
    out += "\n";
    return out;
}

int run_train(TrainArgs& a) {
    apply_enum_args(a.cfg, a.optimizer, a.loss);
    a.clf.normalize = !a.no_normalize;
    const Dataset ds = load_dataset(a.dataset);
    const TextEmbeddingBank texts = load_text_bank(a.text_bank);

    const std::size_t hidden =
        a.bank.hidden_dim > 0 ? a.bank.hidden_dim : default_hidden_dim(ds.dim);
    Rng init_rng(a.cfg.seed);
    AdapterBank bank = AdapterBank::initialized(a.bank.adapters, ds.dim, hidden,
                                                a.bank.lambda, partition_from_args(a.bank),
                                                init_rng);

    TrainResult res = train(bank, ds, texts, a.cfg, a.clf);

    ensure_parent_dir(a.out_bank);
    save_bank(res.bank, a.out_bank);
    ensure_parent_dir(a.out_report);
    write_file_atomic(a.out_report,
                      train_report_text(train_echo(a, res.bank), res.report,
                                        res.bank.partition));
    std::printf("trained %zu adapters on %zu samples; final mean loss %s\n",
                res.bank.size(), ds.samples.size(),
                format_double(res.report.epoch_mean_loss.back()).c_str());
    return 0;
}

// --------------------------------------------------------------------- eval

struct EvalArgs {
    std::string dataset, text_bank, bank_path, report_dir, export_path;
    bool init = false;
    bool unadapted = false;
    bool with_ap50 = false;
    BankArgs bank;
    std::uint64_t init_seed = 1;
    std::size_t report_bins = 4;
    ClassifierConfig clf;
    bool no_normalize = false;
};

std::optional<double> split_mean_ap(const Ap50Result& ap, const std::vector<Split>& splits,
                                    Split which) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t c = 0; c < ap.per_class.size(); ++c) {
        if (splits[c] == which && ap.per_class[c]) {
            sum += *ap.per_class[c];
            n += 1;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

int run_eval(EvalArgs& a) {
    a.clf.normalize = !a.no_normalize;
    const int modes = (a.bank_path.empty() ? 0 : 1) + (a.init ? 1 : 0) + (a.unadapted ? 1 : 0);
    if (modes != 1)
        throw ValidationError("choose exactly one of --bank, --init, --unadapted");

    const Dataset ds = load_dataset(a.dataset);
    const TextEmbeddingBank texts = load_text_bank(a.text_bank);

    std::optional<AdapterBank> bank;
    if (!a.bank_path.empty()) {
        bank = load_bank(a.bank_path);
    } else if (a.init) {
        const std::size_t hidden =
            a.bank.hidden_dim > 0 ? a.bank.hidden_dim : default_hidden_dim(ds.dim);
        Rng rng(a.init_seed);
        bank = AdapterBank::initialized(a.bank.adapters, ds.dim, hidden, a.bank.lambda,
                                        partition_from_args(a.bank), rng);
    }

    const BinPartition report_bins =
        bank ? bank->partition : BinPartition::geometric(a.report_bins);

    const EvalReport rep = evaluate_dataset(ds, bank ? &*bank : nullptr, texts, a.clf,
                                            report_bins, a.with_ap50);

    std::error_code ec;
    fs::create_directories(a.report_dir, ec);
    if (ec) throw IoError("cannot create report directory '" + a.report_dir + "'");
    const fs::path dir(a.report_dir);

    ConfigEcho echo = {
        {"dataset", a.dataset},
        {"text_bank", a.text_bank},
        {"bank", a.bank_path.empty() ? (a.init ? "<init>" : "<unadapted>") : a.bank_path},
        {"report_dir", a.report_dir},
        {"with_ap50", a.with_ap50 ? "true" : "false"},
        {"tau", format_double(a.clf.tau)},
        {"normalize", a.no_normalize ? "false" : "true"},
        {"report_boundaries", boundaries_text(report_bins)},
    };
    if (a.init) {
        echo.push_back({"init_seed", std::to_string(a.init_seed)});
        echo.push_back({"lambda", format_double(a.bank.lambda)});
    }

    std::string summary = timestamp_line();
    summary += "eval report\n";
    summary += echo_block(echo);
    summary += "total " + std::to_string(rep.total) + "\n";
    summary += "overall_accuracy " + format_double(rep.overall_accuracy) + "\n";
    summary += "base_accuracy " + opt_str(rep.base_accuracy) + "\n";
    summary += "novel_accuracy " + opt_str(rep.novel_accuracy) + "\n";
    if (rep.ap50) {
        summary += "mean_ap50 " + opt_str(rep.ap50->mean) + "\n";
        summary += "base_mean_ap50 " +
                   opt_str(split_mean_ap(*rep.ap50, ds.class_splits, Split::base)) + "\n";
        summary += "novel_mean_ap50 " +
                   opt_str(split_mean_ap(*rep.ap50, ds.class_splits, Split::novel)) + "\n";
    }
    write_file_atomic((dir / "report.txt").string(), summary);

    std::string per_class = "class_id,name,split,count,correct,accuracy\n";
    for (std::size_t c = 0; c < rep.per_class.size(); ++c) {
        per_class += std::to_string(c) + "," + ds.class_names[c] + "," +
                     split_name(ds.class_splits[c]) + "," +
                     std::to_string(rep.per_class[c].count) + "," +
                     std::to_string(rep.per_class[c].correct) + "," +
                     opt_str(rep.per_class[c].accuracy) + "\n";
    }
    write_file_atomic((dir / "per_class.csv").string(), per_class);

    std::string per_bin = "bin,lower,upper,count,correct,accuracy\n";
    for (std::size_t b = 0; b < rep.per_bin.size(); ++b) {
        per_bin += std::to_string(b) + "," + format_double(rep.per_bin[b].lower) + "," +
                   format_double(rep.per_bin[b].upper) + "," +
                   std::to_string(rep.per_bin[b].count) + "," +
                   std::to_string(rep.per_bin[b].correct) + "," +
                   opt_str(rep.per_bin[b].accuracy) + "\n";
    }
    write_file_atomic((dir / "per_bin.csv").string(), per_bin);

    std::string confusion = "true\\predicted";
    for (std::size_t c = 0; c < rep.confusion.size(); ++c)
        confusion += "," + std::to_string(c);
    confusion += "\n";
    for (std::size_t t = 0; t < rep.confusion.size(); ++t) {
        confusion += std::to_string(t);
        for (std::size_t p = 0; p < rep.confusion[t].size(); ++p)
            confusion += "," + std::to_string(rep.confusion[t][p]);
        confusion += "\n";
    }
    write_file_atomic((dir / "confusion.csv").string(), confusion);

    if (rep.ap50) {
        std::string ap = "class_id,name,split,ap50\n";
        for (std::size_t c = 0; c < rep.ap50->per_class.size(); ++c) {
            ap += std::to_string(c) + "," + ds.class_names[c] + "," +
                  split_name(ds.class_splits[c]) + "," + opt_str(rep.ap50->per_class[c]) +
                  "\n";
        }
        write_file_atomic((dir / "ap50.csv").string(), ap);
    }

    if (!a.export_path.empty()) {
        if (!bank)
            throw ValidationError("--export-features needs --bank or --init");
        ensure_parent_dir(a.export_path);
        export_adapted_features(ds.samples, *bank, a.export_path);
    }

    std::printf("evaluated %zu samples; overall accuracy %s\n", rep.total,
                format_double(rep.overall_accuracy).c_str());
    return 0;
}

// ---------------------------------------------------------------- gradcheck

struct GradCheckArgs {
    std::size_t dim = 8, hidden_dim = 2, adapters = 3, classes = 5, batch = 4;
    std::size_t instances = 100;
    double step = 1e-4;
    double tolerance = 1e-5;
    double tau = 0.5;
    std::uint64_t seed = 1;
    bool corrupt = false;
    std::string out;
};

struct GradCheckInstance {
    AdapterBank bank;
    TextEmbeddingBank texts;
    std::vector<TrainExample> batch;
};

GradCheckInstance random_instance(const GradCheckArgs& a, Rng& rng) {
    // Rejects instances with any selected pre-activation magnitude below 1e-3
    // so the finite-difference step cannot cross the relu kink.
    while (true) {
        GradCheckInstance inst;
        inst.bank.dim = a.dim;
        inst.bank.hidden_dim = a.hidden_dim;
        inst.bank.lambda = 0.5;
        inst.bank.partition = BinPartition::geometric(a.adapters);
        const double b1 = 1.0 / std::sqrt(static_cast<double>(a.dim));
        const double b2 = 1.0 / std::sqrt(static_cast<double>(a.hidden_dim));
        inst.bank.adapters.resize(a.adapters);
        for (Adapter& ad : inst.bank.adapters) {
            ad.w1 = Matrix(a.dim, a.hidden_dim);
            for (double& v : ad.w1.data()) v = rng.uniform(-b1, b1);
            ad.w2 = Matrix(a.hidden_dim, a.dim);
            for (double& v : ad.w2.data()) v = rng.uniform(-b2, b2);
        }

        inst.texts.dim = a.dim;
        for (std::size_t c = 0; c < a.classes; ++c) {
            std::vector<double> col(a.dim);
            double n = 0.0;
            while (n == 0.0) {
                for (double& v : col) v = rng.normal();
                n = norm2(col);
            }
            for (double& v : col) v /= n;
            inst.texts.embeddings.push_back(std::move(col));
            inst.texts.class_names.push_back("class_" + std::to_string(c));
            inst.texts.class_splits.push_back(Split::base);
        }

        bool ok = true;
        for (std::size_t i = 0; i < a.batch; ++i) {
            TrainExample ex;
            ex.feature.resize(a.dim);
            for (double& v : ex.feature) v = rng.normal();
            const double ratio = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
            ex.box = BoundingBox{0.0, 0.0, 1.0 / std::sqrt(ratio), std::sqrt(ratio)};
            ex.label = static_cast<std::size_t>(rng.below(a.classes));

            const std::size_t j = inst.bank.partition.bin_index(aspect_ratio(ex.box));
            const std::vector<double> h = vec_mat(ex.feature, inst.bank.adapters[j].w1);
            for (double v : h) {
                if (std::fabs(v) < 1e-3) ok = false;
            }
            inst.batch.push_back(std::move(ex));
        }
        if (ok) return inst;
    }
}

int run_gradcheck(GradCheckArgs& a) {
    ClassifierConfig clf;
    clf.tau = a.tau;
    clf.normalize = true;

    Rng rng(a.seed);
    double max_rel = 0.0;
    for (std::size_t i = 0; i < a.instances; ++i) {
        GradCheckInstance inst = random_instance(a, rng);
        LossAndGradients lg = loss_and_gradients(inst.bank, inst.batch, inst.texts, clf);
        if (a.corrupt && i == 0) lg.grads.dw2[0](0, 0) += 0.5;

        auto batch_loss = [&](const AdapterBank& b) {
            return loss_and_gradients(b, inst.batch, inst.texts, clf).loss;
        };
        for (std::size_t j = 0; j < inst.bank.size(); ++j) {
            for (int which = 0; which < 2; ++which) {
                Matrix& w = which == 0 ? inst.bank.adapters[j].w1 : inst.bank.adapters[j].w2;
                const Matrix& g = which == 0 ? lg.grads.dw1[j] : lg.grads.dw2[j];
                for (std::size_t e = 0; e < w.data().size(); ++e) {
                    const double orig = w.data()[e];
                    w.data()[e] = orig + a.step;
                    const double up = batch_loss(inst.bank);
                    w.data()[e] = orig - a.step;
                    const double down = batch_loss(inst.bank);
                    w.data()[e] = orig;
                    const double fd = (up - down) / (2.0 * a.step);
                    const double an = g.data()[e];
                    const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-8});
                    max_rel = std::max(max_rel, std::fabs(fd - an) / denom);
                }
            }
        }
    }

    const bool pass = max_rel <= a.tolerance;
    std::string body = "gradient check\n";
    body += "instances " + std::to_string(a.instances) + "\n";
    body += "max_relative_error " + format_double(max_rel) + "\n";
    body += "tolerance " + format_double(a.tolerance) + "\n";
    body += std::string("result ") + (pass ? "pass" : "fail") + "\n";
    if (!a.out.empty()) {
        ensure_parent_dir(a.out);
        write_file_atomic(a.out, timestamp_line() + body);
    }
    std::fputs(body.c_str(), stdout);
    if (!pass)
        throw CheckFailure("gradient check failed: max relative error " +
                           format_double(max_rel) + " exceeds " +
                           format_double(a.tolerance));
    return 0;
}

// ----------------------------------------------------------------- ablate-n

struct AblateArgs {
    std::string dataset, text_bank, out_csv;
    std::vector<std::size_t> n_list{1, 2, 4, 16};
    double fraction = 0.8;
    std::uint64_t split_seed = 7;
    std::size_t thin_per_class_per_bin = 0;
    std::size_t thin_bins = 4;
    std::size_t hidden_dim = 0;
    double lambda = 0.2;
    TrainConfig cfg;
    std::string optimizer = "adamw";
    std::string loss = "label-ce";
    ClassifierConfig clf;
    bool no_normalize = false;
};

Dataset thin_dataset(const Dataset& ds, std::size_t cap, const BinPartition& bins) {
    Dataset out;
    out.dim = ds.dim;
    out.class_names = ds.class_names;
    out.class_splits = ds.class_splits;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> taken;
    for (const RegionSample& s : ds.samples) {
        const std::size_t b = bins.bin_index(aspect_ratio(s.box));
        std::size_t& count = taken[{s.label, b}];
        if (count < cap) {
            out.samples.push_back(s);
            count += 1;
        }
    }
    return out;
}

int run_ablate(AblateArgs& a) {
    apply_enum_args(a.cfg, a.optimizer, a.loss);
    a.clf.normalize = !a.no_normalize;
    const Dataset ds = load_dataset(a.dataset);
    const TextEmbeddingBank texts = load_text_bank(a.text_bank);

    SplitResult split = split_train_eval(ds, a.fraction, a.split_seed);
    for (const std::string& w : split.warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    Dataset train_set = std::move(split.train);
    if (a.thin_per_class_per_bin > 0) {
        train_set = thin_dataset(train_set, a.thin_per_class_per_bin,
                                 BinPartition::geometric(a.thin_bins));
    }

    std::string csv = "n,boundaries,eval_accuracy\n";
    for (std::size_t n : a.n_list) {
        const std::size_t hidden =
            a.hidden_dim > 0 ? a.hidden_dim : default_hidden_dim(ds.dim);
        const BinPartition part = BinPartition::geometric(n);
        Rng rng(a.cfg.seed);
        AdapterBank bank =
            AdapterBank::initialized(n, ds.dim, hidden, a.lambda, part, rng);
        TrainResult res = train(bank, train_set, texts, a.cfg, a.clf);
        const EvalReport rep = evaluate_dataset(split.eval, &res.bank, texts, a.clf,
                                                res.bank.partition, false);
        csv += std::to_string(n) + "," + boundaries_text(res.bank.partition, ";") + "," +
               format_double(rep.overall_accuracy) + "\n";
        std::printf("n=%zu eval_accuracy=%s\n", n,
                    format_double(rep.overall_accuracy).c_str());
    }
    ensure_parent_dir(a.out_csv);
    write_file_atomic(a.out_csv, csv);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shape-routed adapter bank for open-vocabulary region classification"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI configuration file; command-line flags win");

    GenSynthArgs gen;
    CLI::App* cgen = app.add_subcommand("gen-synth", "Generate a synthetic planted dataset");
    cgen->add_option("--out-dataset", gen.out_dataset, "Output dataset container")->required();
    cgen->add_option("--out-text-bank", gen.out_text_bank, "Output text bank container")
        ->required();
    cgen->add_option("--dim", gen.cfg.dim, "Feature dimension");
    cgen->add_option("--classes", gen.cfg.num_classes, "Number of classes");
    cgen->add_option("--bins", gen.cfg.bins, "Number of planted aspect-ratio bins");
    cgen->add_option("--per-class-per-bin", gen.cfg.samples_per_class_per_bin,
                     "Samples per class per bin");
    cgen->add_option("--noise", gen.cfg.noise_sigma, "Noise standard deviation");
    cgen->add_option("--kind", gen.kind, "Deformation kind")
        ->check(CLI::IsMember({"rotation", "general-linear"}));
    cgen->add_option("--seed", gen.cfg.seed, "Generator seed");
    cgen->add_option("--novel-classes", gen.cfg.num_novel_classes,
                     "Trailing classes tagged novel");

    SplitArgs spl;
    CLI::App* cspl = app.add_subcommand("split", "Split a dataset into train and eval");
    cspl->add_option("--dataset", spl.dataset, "Input dataset")->required();
    cspl->add_option("--out-train", spl.out_train, "Output training dataset")->required();
    cspl->add_option("--out-eval", spl.out_eval, "Output evaluation dataset")->required();
    cspl->add_option("--fraction", spl.fraction, "Training fraction in (0, 1)");
    cspl->add_option("--seed", spl.seed, "Split seed");
    cspl->add_option("--stratify-bins", spl.stratify_bins,
                     "Also stratify by this many geometric aspect-ratio bins (0 = off)");

    TrainArgs tr;
    CLI::App* ctr = app.add_subcommand("train", "Train an adapter bank");
    ctr->add_option("--dataset", tr.dataset, "Training dataset")->required();
    ctr->add_option("--text-bank", tr.text_bank, "Text embedding bank")->required();
    ctr->add_option("--out-bank", tr.out_bank, "Output bank checkpoint")->required();
    ctr->add_option("--out-report", tr.out_report, "Output train report")->required();
    ctr->add_option("--adapters", tr.bank.adapters, "Number of adapters");
    ctr->add_option("--hidden-dim", tr.bank.hidden_dim, "Bottleneck width (0 = dim/4)");
    ctr->add_option("--lambda", tr.bank.lambda, "Residual blend weight in [0, 1]");
    ctr->add_option("--boundaries", tr.bank.boundaries,
                    "Comma-separated interior bin boundaries (default geometric)");
    ctr->add_option("--epochs", tr.cfg.epochs, "Training epochs");
    ctr->add_option("--lr", tr.cfg.base_lr, "Base learning rate");
    ctr->add_option("--lr-decay-factor", tr.cfg.lr_decay_factor, "Learning-rate decay factor");
    ctr->add_option("--lr-decay-after", tr.cfg.lr_decay_after_epoch,
                    "Epochs before the single decay step");
    ctr->add_option("--batch-size", tr.cfg.batch_size, "Mini-batch size");
    ctr->add_option("--weight-decay", tr.cfg.weight_decay, "Decoupled weight decay");
    ctr->add_option("--seed", tr.cfg.seed, "Initialization and shuffling seed");
    ctr->add_option("--optimizer", tr.optimizer, "Optimizer")
        ->check(CLI::IsMember({"adamw", "sgd"}));
    ctr->add_option("--loss", tr.loss, "Loss variant")
        ->check(CLI::IsMember({"label-ce", "all-class-mean"}));
    ctr->add_option("--tau", tr.clf.tau, "Softmax temperature");
    ctr->add_flag("--no-normalize", tr.no_normalize, "Skip L2 normalization");

    EvalArgs ev;
    CLI::App* cev = app.add_subcommand("eval", "Evaluate a bank (or baselines) on a dataset");
    cev->add_option("--dataset", ev.dataset, "Evaluation dataset")->required();
    cev->add_option("--text-bank", ev.text_bank, "Text embedding bank")->required();
    cev->add_option("--report-dir", ev.report_dir, "Output report directory")->required();
    cev->add_option("--bank", ev.bank_path, "Bank checkpoint to evaluate");
    cev->add_flag("--init", ev.init, "Evaluate a freshly initialized bank");
    cev->add_flag("--unadapted", ev.unadapted, "Evaluate raw features with no bank");
    cev->add_flag("--with-ap50", ev.with_ap50, "Also compute ground-truth-box AP50");
    cev->add_option("--adapters", ev.bank.adapters, "Adapters for --init");
    cev->add_option("--hidden-dim", ev.bank.hidden_dim, "Bottleneck width for --init");
    cev->add_option("--lambda", ev.bank.lambda, "Residual blend weight for --init");
    cev->add_option("--boundaries", ev.bank.boundaries, "Interior boundaries for --init");
    cev->add_option("--init-seed", ev.init_seed, "Initialization seed for --init");
    cev->add_option("--report-bins", ev.report_bins,
                    "Geometric report bins when no bank is loaded");
    cev->add_option("--tau", ev.clf.tau, "Softmax temperature");
    cev->add_flag("--no-normalize", ev.no_normalize, "Skip L2 normalization");
    cev->add_option("--export-features", ev.export_path,
                    "Also export adapted features to this CSV");

    GradCheckArgs gc;
    CLI::App* cgc = app.add_subcommand("gradcheck",
                                       "Check analytic gradients against finite differences");
    cgc->add_option("--dim", gc.dim, "Feature dimension");
    cgc->add_option("--hidden-dim", gc.hidden_dim, "Bottleneck width");
    cgc->add_option("--adapters", gc.adapters, "Number of adapters");
    cgc->add_option("--classes", gc.classes, "Number of classes");
    cgc->add_option("--batch", gc.batch, "Batch size per instance");
    cgc->add_option("--instances", gc.instances, "Random instances to check");
    cgc->add_option("--step", gc.step, "Central-difference step");
    cgc->add_option("--tolerance", gc.tolerance, "Maximum relative error allowed");
    cgc->add_option("--tau", gc.tau, "Softmax temperature used by the check");
    cgc->add_option("--seed", gc.seed, "Instance seed");
    cgc->add_option("--out", gc.out, "Optional report path");
    cgc->add_flag("--corrupt", gc.corrupt, "Self-test hook: corrupt one gradient entry")
        ->group("");

    AblateArgs ab;
    CLI::App* cab = app.add_subcommand("ablate-n", "Sweep the adapter count");
    cab->add_option("--dataset", ab.dataset, "Full dataset (split internally)")->required();
    cab->add_option("--text-bank", ab.text_bank, "Text embedding bank")->required();
    cab->add_option("--out", ab.out_csv, "Output CSV table")->required();
    cab->add_option("--n-list", ab.n_list, "Adapter counts to sweep");
    cab->add_option("--fraction", ab.fraction, "Training fraction");
    cab->add_option("--split-seed", ab.split_seed, "Split seed");
    cab->add_option("--thin-per-class-per-bin", ab.thin_per_class_per_bin,
                    "Cap training samples per class per bin (0 = off)");
    cab->add_option("--thin-bins", ab.thin_bins, "Geometric bins used for thinning");
    cab->add_option("--hidden-dim", ab.hidden_dim, "Bottleneck width (0 = dim/4)");
    cab->add_option("--lambda", ab.lambda, "Residual blend weight");
    cab->add_option("--epochs", ab.cfg.epochs, "Training epochs");
    cab->add_option("--lr", ab.cfg.base_lr, "Base learning rate");
    cab->add_option("--lr-decay-factor", ab.cfg.lr_decay_factor, "Learning-rate decay factor");
    cab->add_option("--lr-decay-after", ab.cfg.lr_decay_after_epoch,
                    "Epochs before the single decay step");
    cab->add_option("--batch-size", ab.cfg.batch_size, "Mini-batch size");
    cab->add_option("--weight-decay", ab.cfg.weight_decay, "Decoupled weight decay");
    cab->add_option("--seed", ab.cfg.seed, "Per-run train seed");
    cab->add_option("--optimizer", ab.optimizer, "Optimizer")
        ->check(CLI::IsMember({"adamw", "sgd"}));
    cab->add_option("--loss", ab.loss, "Loss variant")
        ->check(CLI::IsMember({"label-ce", "all-class-mean"}));
    cab->add_option("--tau", ab.clf.tau, "Softmax temperature");
    cab->add_flag("--no-normalize", ab.no_normalize, "Skip L2 normalization");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cgen->parsed()) return run_gen_synth(gen);
        if (cspl->parsed()) return run_split(spl);
        if (ctr->parsed()) return run_train(tr);
        if (cev->parsed()) return run_eval(ev);
        if (cgc->parsed()) return run_gradcheck(gc);
        if (cab->parsed()) return run_ablate(ab);
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const CheckFailure& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
