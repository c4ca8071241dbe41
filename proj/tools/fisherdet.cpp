// fisherdet: train a small classifier, attack it, and detect the attacks
// through Fisher-information scores. One binary, subcommand style; every run
// writes a JSON manifest recording parameters, inputs and output checksums.

#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "fisherdet/fisherdet.hpp"

namespace fs = std::filesystem;
using namespace fisherdet;

namespace {

// Relative data paths that don't exist locally are retried under
// $FISHERDET_DATA_DIR, so datasets can live outside the working directory.
std::string resolve_data_path(const std::string& p) {
    if (p.empty() || fs::exists(p)) return p;
    if (fs::path(p).is_relative()) {
        if (const char* base = std::getenv("FISHERDET_DATA_DIR")) {
            fs::path cand = fs::path(base) / p;
            if (fs::exists(cand)) return cand.string();
        }
    }
    return p;
}

std::size_t max_label(const LabeledDataset& ds) {
    std::size_t m = 0;
    for (std::size_t l : ds.labels) m = std::max(m, l);
    return m;
}

Network make_arch(const std::string& arch, const LabeledDataset& ds) {
    const auto& shape = ds.inputs[0].shape;
    std::string chosen = arch;
    if (chosen == "auto")
        chosen = (shape == std::vector<std::size_t>{28, 28}) ? "mnist" : "mlp";
    if (chosen == "mnist") {
        if (shape != std::vector<std::size_t>{28, 28})
            throw ConfigError("arch 'mnist' expects 28x28 inputs, got " + shape_string(shape));
        return Network({28, 28}, {LayerSpec::conv2d(1, 8, 5), LayerSpec::relu(),
                                  LayerSpec::maxpool2d(2, 2), LayerSpec::conv2d(8, 16, 5),
                                  LayerSpec::relu(), LayerSpec::maxpool2d(2, 2),
                                  LayerSpec::flatten(), LayerSpec::dense(256, 64),
                                  LayerSpec::relu(), LayerSpec::dense(64, 10),
                                  LayerSpec::softmax()});
    }
    if (chosen == "mlp") {
        std::size_t dim = ds.inputs[0].size();
        std::size_t classes = std::max<std::size_t>(max_label(ds) + 1, 2);
        std::vector<LayerSpec> layers;
        if (shape.size() > 1) layers.push_back(LayerSpec::flatten());
        layers.push_back(LayerSpec::dense(dim, 32));
        layers.push_back(LayerSpec::relu());
        layers.push_back(LayerSpec::dense(32, classes));
        layers.push_back(LayerSpec::softmax());
        return Network(shape, std::move(layers));
    }
    throw ConfigError("unknown architecture '" + arch + "' (choose auto, mnist or mlp)");
}

void truncate_dataset(LabeledDataset& ds, std::size_t limit) {
    if (limit > 0 && limit < ds.size()) {
        ds.inputs.resize(limit);
        ds.labels.resize(limit);
    }
}

std::string default_manifest_path(const std::string& primary_output) {
    return primary_output + ".manifest.json";
}

ScoreConfig make_score_config(bool full_c, const std::string& mode, double eps_prime,
                              double lambda) {
    ScoreConfig cfg;
    cfg.class_mode = full_c ? ClassMode::full_C : ClassMode::two_class;
    if (mode == "backprop") cfg.derivative_mode = DerivativeMode::backprop;
    else if (mode == "fd") cfg.derivative_mode = DerivativeMode::finite_difference;
    else throw CLI::ValidationError("--mode", "use 'backprop' or 'fd'");
    cfg.fd_step = eps_prime;
    cfg.lambda = lambda;
    return cfg;
}

// ---- train ---------------------------------------------------------------

struct TrainOpts {
    std::string images, labels, test_images, test_labels;
    bool blobs = false;
    std::size_t blob_classes = 3, blob_per_class = 100, blob_dim = 4;
    std::uint64_t blob_seed = 7;
    std::string arch = "auto";
    std::size_t epochs = 5, batch = 32;
    double lr = 0.01, momentum = 0.9;
    std::uint64_t seed = 1;
    std::string out = "model.fim", log = "train_log.csv", manifest;
};

int run_train(const TrainOpts& o) {
    Stopwatch watch;
    RunManifest man;
    man.subcommand = "train";

    LabeledDataset data;
    if (o.blobs) {
        data = synthetic_blobs(o.blob_classes, o.blob_per_class, o.blob_dim, o.blob_seed);
    } else {
        if (o.images.empty() || o.labels.empty())
            throw CLI::ValidationError("train", "either --blobs or --images/--labels is required");
        std::string ip = resolve_data_path(o.images), lp = resolve_data_path(o.labels);
        data = load_idx(ip, lp);
        man.input_paths = {ip, lp};
    }
    LabeledDataset test;
    bool have_test = !o.test_images.empty() && !o.test_labels.empty();
    if (have_test) {
        std::string ip = resolve_data_path(o.test_images), lp = resolve_data_path(o.test_labels);
        test = load_idx(ip, lp);
        man.input_paths.push_back(ip);
        man.input_paths.push_back(lp);
    }

    Network net = make_arch(o.arch, data);
    net.init_params(o.seed);

    TrainConfig cfg;
    cfg.learning_rate = o.lr;
    cfg.momentum = o.momentum;
    cfg.batch_size = o.batch;
    cfg.epochs = o.epochs;
    cfg.seed = o.seed;
    TrainResult res = sgd_train(net, data, cfg, have_test ? &test : nullptr);

    save_model(res.net, o.out);
    {
        std::ofstream log(o.log, std::ios::trunc);
        if (!log) throw IoError("cannot write " + o.log);
        log.precision(10);
        log << "epoch,loss,train_acc,test_acc\n";
        for (const auto& s : res.trace) {
            log << s.epoch << ',' << s.loss << ',' << s.train_acc << ',';
            if (std::isnan(s.test_acc)) log << "nan";
            else log << s.test_acc;
            log << '\n';
        }
    }

    double final_train = res.trace.empty() ? accuracy(res.net, data) : res.trace.back().train_acc;
    std::cout << "trained " << net.param_count() << " parameters for " << o.epochs
              << " epochs; train accuracy " << final_train;
    if (have_test) std::cout << ", test accuracy " << accuracy(res.net, test);
    std::cout << "\nmodel -> " << o.out << "\n";

    man.parameters = {{"arch", o.arch},        {"epochs", o.epochs},
                      {"batch_size", o.batch}, {"learning_rate", o.lr},
                      {"momentum", o.momentum}, {"seed", o.seed},
                      {"blobs", o.blobs}};
    if (o.blobs)
        man.parameters["blob"] = {{"classes", o.blob_classes},
                                  {"per_class", o.blob_per_class},
                                  {"dim", o.blob_dim},
                                  {"seed", o.blob_seed}};
    man.add_output(o.out);
    man.add_output(o.log);
    man.wall_seconds = watch.seconds();
    man.write(o.manifest.empty() ? default_manifest_path(o.out) : o.manifest);
    return 0;
}

// ---- attack --------------------------------------------------------------

struct AttackOpts {
    std::string model, images, labels;
    std::string method = "mi_fgsm", label_source = "true";
    double eps = 0.1, momentum = 1.0;
    std::size_t steps = 10, limit = 0;
    std::string out_images = "adv-images-idx3-ubyte", out_labels = "adv-labels-idx1-ubyte";
    std::string csv = "attack_log.csv", manifest;
};

int run_attack(const AttackOpts& o) {
    Stopwatch watch;
    RunManifest man;
    man.subcommand = "attack";

    Network net = load_model(o.model);
    std::string ip = resolve_data_path(o.images), lp = resolve_data_path(o.labels);
    LabeledDataset data = load_idx(ip, lp);
    truncate_dataset(data, o.limit);
    man.input_paths = {o.model, ip, lp};

    AttackConfig cfg;
    if (o.method == "fgsm") cfg.method = AttackMethod::fgsm;
    else if (o.method == "mi_fgsm") cfg.method = AttackMethod::mi_fgsm;
    else throw CLI::ValidationError("--method", "unknown method '" + o.method + "'");
    cfg.epsilon = o.eps;
    cfg.steps = o.steps;
    cfg.momentum = o.momentum;
    LabelSource src = LabelSource::true_label;
    if (o.label_source == "predicted") src = LabelSource::predicted_label;
    else if (o.label_source != "true")
        throw CLI::ValidationError("--label-source", "use 'true' or 'predicted'");

    AttackBatchResult res = attack_batch(net, data, cfg, src);
    save_idx(res.adversarial, o.out_images, o.out_labels);
    {
        std::ofstream csv(o.csv, std::ios::trunc);
        if (!csv) throw IoError("cannot write " + o.csv);
        csv << "index,clean_pred,adv_pred,success\n";
        for (const auto& r : res.records)
            csv << r.index << ',' << r.clean_pred << ',' << r.adv_pred << ','
                << (r.success ? 1 : 0) << '\n';
    }

    double clean_acc = accuracy(net, data);
    double adv_acc = accuracy(net, res.adversarial);
    std::cout << "attacked " << data.size() << " samples: clean accuracy " << clean_acc
              << ", adversarial accuracy " << adv_acc << ", prediction flipped on "
              << res.success_count() << " samples\n"
              << "note: adversarial pixels are quantized to 1/255 steps in the IDX output\n";

    man.parameters = {{"method", o.method},       {"eps", o.eps},
                      {"steps", o.steps},         {"momentum", o.momentum},
                      {"label_source", o.label_source}, {"limit", o.limit}};
    man.add_output(o.out_images);
    man.add_output(o.out_labels);
    man.add_output(o.csv);
    man.wall_seconds = watch.seconds();
    man.write(o.manifest.empty() ? default_manifest_path(o.out_images) : o.manifest);
    return 0;
}

// ---- score ---------------------------------------------------------------

struct ScoreOpts {
    std::string model, images, labels;
    std::string quantity = "all", mode = "fd", mark = "unknown";
    double eps_prime = 1e-4, lambda = 0.01;
    bool full_c = false;
    std::size_t limit = 0;
    std::string out = "scores.csv", manifest;
};

int run_score(const ScoreOpts& o) {
    Stopwatch watch;
    RunManifest man;
    man.subcommand = "score";

    Network net = load_model(o.model);
    std::string ip = resolve_data_path(o.images), lp = resolve_data_path(o.labels);
    LabeledDataset data = load_idx(ip, lp);
    truncate_dataset(data, o.limit);
    data.validate(net.num_classes());
    man.input_paths = {o.model, ip, lp};

    ScoreConfig cfg = make_score_config(o.full_c, o.mode, o.eps_prime, o.lambda);
    bool want_trace = o.quantity == "all" || o.quantity == "trace";
    bool want_form = o.quantity == "all" || o.quantity == "form";
    bool want_nform = o.quantity == "all" || o.quantity == "nform";
    if (!want_trace && !want_form && !want_nform)
        throw CLI::ValidationError("--quantity", "use trace, form, nform or all");
    int adv_flag = o.mark == "adversarial" ? 1 : (o.mark == "clean" ? 0 : -1);
    if (o.mark != "adversarial" && o.mark != "clean" && o.mark != "unknown")
        throw CLI::ValidationError("--mark", "use clean, adversarial or unknown");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<ScoreRow> rows;
    rows.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Tensor& x = data.inputs[i];
        ScoreRow row;
        row.sample_index = i;
        row.label = data.labels[i];
        row.is_adversarial = adv_flag;
        Eval e = net.evaluate(x);
        row.predicted = e.predicted;
        row.trace = want_trace ? fisher_trace(net, x, cfg) : nan;
        if (want_form) {
            DirectionVector dv = direction_v(net, x, cfg);
            row.form = fisher_form(net, x, dv, cfg);
        } else {
            row.form = nan;
        }
        row.normalized_form = want_nform ? fisher_form_normalized(net, x, cfg) : nan;
        rows.push_back(row);
    }
    write_scores_csv(rows, o.out);
    std::cout << "scored " << rows.size() << " samples -> " << o.out << "\n";

    man.parameters = {{"quantity", o.quantity}, {"mode", o.mode},
                      {"eps_prime", o.eps_prime}, {"lambda", o.lambda},
                      {"two_class", !o.full_c},  {"mark", o.mark},
                      {"limit", o.limit}};
    man.add_output(o.out);
    man.wall_seconds = watch.seconds();
    man.write(o.manifest.empty() ? default_manifest_path(o.out) : o.manifest);
    return 0;
}

// ---- roc -----------------------------------------------------------------

struct RocOpts {
    std::string clean_csv, adv_csv;
    std::string quantity = "nform";
    std::string out = "roc.csv", manifest;
};

int run_roc(const RocOpts& o) {
    Stopwatch watch;
    RunManifest man;
    man.subcommand = "roc";
    man.input_paths = {o.clean_csv, o.adv_csv};

    std::vector<double> clean = score_column(read_scores_csv(o.clean_csv), o.quantity);
    std::vector<double> adv = score_column(read_scores_csv(o.adv_csv), o.quantity);
    for (double v : clean)
        if (std::isnan(v))
            throw DataError(o.clean_csv + " has no '" + o.quantity + "' values (column is nan)");
    for (double v : adv)
        if (std::isnan(v))
            throw DataError(o.adv_csv + " has no '" + o.quantity + "' values (column is nan)");

    RocCurve curve = roc(clean, adv);
    write_roc_csv(curve, o.out);
    std::cout << "AUC(" << o.quantity << ") = " << curve.auc << "\n";

    man.parameters = {{"quantity", o.quantity}};
    man.add_output(o.out);
    man.wall_seconds = watch.seconds();
    man.write(o.manifest.empty() ? default_manifest_path(o.out) : o.manifest);
    return 0;
}

// ---- fis -----------------------------------------------------------------

struct FisOpts {
    std::string model, images, labels;
    std::size_t index = 0;
    double eps_prime = 1e-4, lambda = 0.01;
    bool full_c = false;
    std::string scaling = "shared", view = "absolute";
    double attack_eps = 0.1, attack_momentum = 1.0;
    std::size_t attack_steps = 10;
    std::string out_dir = ".", prefix = "fis", manifest;
};

int run_fis(const FisOpts& o) {
    Stopwatch watch;
    RunManifest man;
    man.subcommand = "fis";

    Network net = load_model(o.model);
    std::string ip = resolve_data_path(o.images), lp = resolve_data_path(o.labels);
    LabeledDataset data = load_idx(ip, lp);
    man.input_paths = {o.model, ip, lp};
    if (o.index >= data.size())
        throw DataError("--index " + std::to_string(o.index) + " out of range (dataset has " +
                        std::to_string(data.size()) + " samples)");
    if (o.scaling != "shared" && o.scaling != "per-image")
        throw CLI::ValidationError("--scaling", "use 'shared' or 'per-image'");
    if (o.view != "absolute" && o.view != "signed")
        throw CLI::ValidationError("--view", "use 'absolute' or 'signed'");

    const Tensor& x = data.inputs[o.index];
    std::size_t y = data.labels[o.index];
    AttackConfig acfg;
    acfg.method = AttackMethod::mi_fgsm;
    acfg.epsilon = o.attack_eps;
    acfg.steps = o.attack_steps;
    acfg.momentum = o.attack_momentum;
    Tensor x_adv = mi_fgsm(net, x, y, acfg);

    ScoreConfig cfg = make_score_config(o.full_c, "fd", o.eps_prime, o.lambda);
    FisMap clean_map = fis(net, x, direction_v(net, x, cfg), cfg);
    FisMap adv_map = fis(net, x_adv, direction_v(net, x_adv, cfg), cfg);

    HeatmapExportConfig ex;
    ex.value_view = o.view == "absolute" ? ValueView::absolute_values : ValueView::signed_values;
    if (o.scaling == "shared") {
        ex.scaling = HeatmapScaling::shared_scale;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const FisMap* m : {&clean_map, &adv_map})
            for (double v : m->values.data) {
                double t = ex.value_view == ValueView::absolute_values ? std::abs(v) : v;
                lo = std::min(lo, t);
                hi = std::max(hi, t);
            }
        ex.shared_min = lo;
        ex.shared_max = hi;
    } else {
        ex.scaling = HeatmapScaling::per_image_scale;
    }

    fs::create_directories(o.out_dir);
    auto path = [&](const std::string& tail) {
        return (fs::path(o.out_dir) / (o.prefix + "_" + tail)).string();
    };
    ex.format = HeatmapFormat::pgm;
    export_heatmap(clean_map, ex, path("clean.pgm"));
    export_heatmap(adv_map, ex, path("adv.pgm"));
    ex.format = HeatmapFormat::csv;
    export_heatmap(clean_map, ex, path("clean.csv"));
    export_heatmap(adv_map, ex, path("adv.csv"));
    export_image_pgm(x, path("clean_input.pgm"));
    export_image_pgm(x_adv, path("adv_input.pgm"));

    std::size_t clean_pred = net.evaluate(x).predicted;
    std::size_t adv_pred = net.evaluate(x_adv).predicted;
    std::cout << "sample " << o.index << " (label " << y << "): clean prediction " << clean_pred
              << ", adversarial prediction " << adv_pred << "\n"
              << "heatmaps -> " << path("{clean,adv}.{pgm,csv}") << "\n";

    man.parameters = {{"index", o.index},       {"eps_prime", o.eps_prime},
                      {"lambda", o.lambda},     {"two_class", !o.full_c},
                      {"scaling", o.scaling},   {"view", o.view},
                      {"attack_eps", o.attack_eps}, {"attack_steps", o.attack_steps},
                      {"attack_momentum", o.attack_momentum}};
    for (const char* t : {"clean.pgm", "adv.pgm", "clean.csv", "adv.csv", "clean_input.pgm",
                          "adv_input.pgm"})
        man.add_output(path(t));
    man.wall_seconds = watch.seconds();
    man.write(o.manifest.empty() ? path("run.manifest.json") : o.manifest);
    return 0;
}

// ---- selfcheck -----------------------------------------------------------

struct SelfcheckOpts {
    bool inject_fault = false;
    std::string manifest = "selfcheck.manifest.json";
};

int run_selfcheck(const SelfcheckOpts& o) {
    Stopwatch watch;
    bool all_ok = true;
    auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "ok  " : "FAIL") << "  " << name;
        if (!detail.empty()) std::cout << "  (" << detail << ")";
        std::cout << "\n";
        if (!ok) all_ok = false;
    };

    // fixture: small MLP with reproducible parameters
    Network mlp({4}, {LayerSpec::dense(4, 6), LayerSpec::relu(), LayerSpec::dense(6, 3),
                      LayerSpec::softmax()});
    mlp.init_params(101);
    Tensor x({4}, {0.35, 0.8, 0.15, 0.6});

    // fixture: tiny conv net
    Network conv({6, 6}, {LayerSpec::conv2d(1, 2, 3), LayerSpec::relu(),
                          LayerSpec::maxpool2d(2, 2), LayerSpec::flatten(),
                          LayerSpec::dense(8, 3), LayerSpec::softmax()});
    conv.init_params(202);
    Tensor xc = Tensor::zeros({6, 6});
    {
        Rng r(303);
        for (auto& v : xc.data) v = r.uniform();
    }

    using Fixture = std::tuple<const Network*, const Tensor*, const char*>;
    const std::array<Fixture, 2> fixtures = {Fixture{&mlp, &x, "mlp"}, Fixture{&conv, &xc, "conv"}};
    for (auto mode : {ClassMode::full_C, ClassMode::two_class}) {
        const char* mname = mode == ClassMode::full_C ? "full_C" : "two_class";
        for (auto [net, input, nname] : fixtures) {
            ScoreConfig cfg;
            cfg.class_mode = mode;
            cfg.derivative_mode = DerivativeMode::backprop;
            FisherMatrix F = full_fisher(*net, *input, mode);
            double fast = fisher_trace(*net, *input, cfg);
            double slow = F.trace();
            report(std::string("trace == trace(full Fisher), ") + nname + ", " + mname,
                   std::abs(fast - slow) <= 1e-10,
                   "fast " + std::to_string(fast) + " vs oracle " + std::to_string(slow));

            Rng r(17);
            bool forms_ok = true;
            double worst = 0.0;
            for (int k = 0; k < 5; ++k) {
                ParamVector v(net->param_count());
                for (auto& c : v) c = r.normal();
                if (o.inject_fault) v[0] += 1e-3; // deliberate corruption for the negative control
                DirectionVector dv;
                dv.v = v;
                dv.scale = 1.0;
                double fast_form = fisher_form(*net, *input, dv, cfg);
                ParamVector v_oracle = v;
                if (o.inject_fault) v_oracle[0] -= 1e-3; // oracle sees the uncorrupted direction
                double slow_form = F.quad(v_oracle);
                worst = std::max(worst, std::abs(fast_form - slow_form));
                if (std::abs(fast_form - slow_form) > 1e-10) forms_ok = false;
            }
            report(std::string("form == v^T F v, ") + nname + ", " + mname, forms_ok,
                   "worst |diff| " + std::to_string(worst));

            ScoreConfig fcfg = cfg;
            fcfg.derivative_mode = DerivativeMode::finite_difference;
            DirectionVector dv = direction_v(*net, *input, fcfg);
            FisMap map = fis(*net, *input, dv, fcfg);
            DeltaVFisherMatrix M = delta_v_fisher_full(*net, *input, dv, fcfg);
            auto diag = M.diagonal();
            bool fis_ok = true;
            for (std::size_t i = 0; i < diag.size(); ++i)
                if (std::abs(map.values.data[i] - diag[i]) >
                    1e-9 * std::max(1.0, std::abs(diag[i])))
                    fis_ok = false;
            report(std::string("FIS == diag(delta_v Fisher), ") + nname + ", " + mname, fis_ok, "");
        }
    }

    {
        ParamVector v(mlp.param_count());
        Rng r(23);
        for (auto& c : v) c = r.normal(0.0, 0.2);
        auto pts = kl_taylor_check(mlp, x, v, {1e-2, 5e-3});
        double ratio = pts[0].residual / pts[1].residual;
        report("KL Taylor residual ratio in [6,10]", ratio >= 6.0 && ratio <= 10.0,
               "ratio " + std::to_string(ratio));
    }

    {
        RocCurve c = roc({0.1, 0.4}, {0.3, 0.9});
        report("ROC fixed case AUC == 0.75", std::abs(c.auc - 0.75) < 1e-12,
               "auc " + std::to_string(c.auc));
    }

    std::cout << (all_ok ? "selfcheck: PASS" : "selfcheck: FAIL") << "\n";

    RunManifest man;
    man.subcommand = "selfcheck";
    man.parameters = {{"inject_fault", o.inject_fault}};
    man.wall_seconds = watch.seconds();
    man.write(o.manifest);
    return all_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fisher-information adversarial-input detection pipeline"};
    app.require_subcommand(1);
    int rc = 0;

    TrainOpts to;
    CLI::App* train = app.add_subcommand("train", "Train a classifier with SGD");
    train->add_option("--images", to.images, "training images (IDX)");
    train->add_option("--labels", to.labels, "training labels (IDX)");
    train->add_option("--test-images", to.test_images, "held-out images (IDX)");
    train->add_option("--test-labels", to.test_labels, "held-out labels (IDX)");
    train->add_flag("--blobs", to.blobs, "train on the synthetic blobs fixture");
    train->add_option("--blob-classes", to.blob_classes, "blobs: number of classes");
    train->add_option("--blob-per-class", to.blob_per_class, "blobs: samples per class");
    train->add_option("--blob-dim", to.blob_dim, "blobs: input dimension");
    train->add_option("--blob-seed", to.blob_seed, "blobs: sampling seed");
    train->add_option("--arch", to.arch, "architecture: auto, mnist or mlp");
    train->add_option("--epochs", to.epochs, "training epochs");
    train->add_option("--batch-size", to.batch, "minibatch size");
    train->add_option("--lr", to.lr, "learning rate");
    train->add_option("--momentum", to.momentum, "SGD momentum in [0,1)");
    train->add_option("--seed", to.seed, "init + shuffle seed");
    train->add_option("--out", to.out, "model output path");
    train->add_option("--log", to.log, "training-log CSV path");
    train->add_option("--manifest", to.manifest, "manifest path (default: <out>.manifest.json)");
    train->callback([&] { rc = run_train(to); });

    AttackOpts ao;
    CLI::App* attack = app.add_subcommand("attack", "Craft adversarial examples");
    attack->add_option("--model", ao.model, "model file")->required();
    attack->add_option("--images", ao.images, "images to attack (IDX)")->required();
    attack->add_option("--labels", ao.labels, "labels (IDX)")->required();
    attack->add_option("--method", ao.method, "fgsm or mi_fgsm");
    attack->add_option("--eps", ao.eps, "infinity-norm budget");
    attack->add_option("--steps", ao.steps, "MI-FGSM iterations T");
    attack->add_option("--momentum", ao.momentum, "MI-FGSM momentum mu");
    attack->add_option("--label-source", ao.label_source, "loss label: true or predicted");
    attack->add_option("--limit", ao.limit, "attack only the first N samples (0 = all)");
    attack->add_option("--out-images", ao.out_images, "adversarial images output (IDX)");
    attack->add_option("--out-labels", ao.out_labels, "labels output (IDX)");
    attack->add_option("--csv", ao.csv, "per-sample outcome CSV");
    attack->add_option("--manifest", ao.manifest, "manifest path");
    attack->callback([&] { rc = run_attack(ao); });

    ScoreOpts so;
    CLI::App* score = app.add_subcommand("score", "Fisher scores for a dataset");
    score->add_option("--model", so.model, "model file")->required();
    score->add_option("--images", so.images, "images (IDX)")->required();
    score->add_option("--labels", so.labels, "labels (IDX)")->required();
    score->add_option("--quantity", so.quantity, "trace, form, nform or all");
    score->add_option("--mode", so.mode, "derivative mode: backprop or fd");
    score->add_option("--eps-prime", so.eps_prime, "finite-difference step");
    score->add_option("--lambda", so.lambda, "direction-vector scale");
    score->add_flag("--full-c", so.full_c, "use all C classes (default: two-class reduction)");
    score->add_option("--mark", so.mark, "tag rows: clean, adversarial or unknown");
    score->add_option("--limit", so.limit, "score only the first N samples (0 = all)");
    score->add_option("--out", so.out, "score CSV path");
    score->add_option("--manifest", so.manifest, "manifest path");
    score->callback([&] { rc = run_score(so); });

    RocOpts ro;
    CLI::App* rocc = app.add_subcommand("roc", "ROC/AUC from two score CSVs");
    rocc->add_option("--clean", ro.clean_csv, "clean score CSV")->required();
    rocc->add_option("--adv", ro.adv_csv, "adversarial score CSV")->required();
    rocc->add_option("--quantity", ro.quantity, "trace, form or nform");
    rocc->add_option("--out", ro.out, "ROC curve CSV path");
    rocc->add_option("--manifest", ro.manifest, "manifest path");
    rocc->callback([&] { rc = run_roc(ro); });

    FisOpts fo;
    CLI::App* fsc = app.add_subcommand("fis", "FIS heatmaps for one sample");
    fsc->add_option("--model", fo.model, "model file")->required();
    fsc->add_option("--images", fo.images, "images (IDX)")->required();
    fsc->add_option("--labels", fo.labels, "labels (IDX)")->required();
    fsc->add_option("--index", fo.index, "sample index");
    fsc->add_option("--eps-prime", fo.eps_prime, "finite-difference step");
    fsc->add_option("--lambda", fo.lambda, "direction-vector scale");
    fsc->add_flag("--full-c", fo.full_c, "use all C classes");
    fsc->add_option("--scaling", fo.scaling, "shared or per-image");
    fsc->add_option("--view", fo.view, "absolute or signed");
    fsc->add_option("--attack-eps", fo.attack_eps, "attack budget for the adversarial twin");
    fsc->add_option("--attack-steps", fo.attack_steps, "attack iterations");
    fsc->add_option("--attack-momentum", fo.attack_momentum, "attack momentum");
    fsc->add_option("--out-dir", fo.out_dir, "output directory");
    fsc->add_option("--prefix", fo.prefix, "output filename prefix");
    fsc->add_option("--manifest", fo.manifest, "manifest path");
    fsc->callback([&] { rc = run_fis(fo); });

    SelfcheckOpts co;
    CLI::App* check = app.add_subcommand("selfcheck", "Run the oracle identity suite");
    check->add_option("--manifest", co.manifest, "manifest path");
    CLI::Option* fault = check->add_flag("--inject-fault", co.inject_fault,
                                         "corrupt one check on purpose (negative control)");
    fault->group(""); // hidden from help
    check->callback([&] { rc = run_selfcheck(co); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
