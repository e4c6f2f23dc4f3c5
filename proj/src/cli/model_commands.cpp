#include "common.hpp"

#include "krawtex/dataio.hpp"
#include "krawtex/format.hpp"
#include "krawtex/metrics.hpp"
#include "krawtex/nn/gradcheck.hpp"
#include "krawtex/nn/ops.hpp"
#include "krawtex/nn/trainer.hpp"

#include <memory>
#include <random>

namespace krawtex::cli {

namespace {

void check_scale(double scale)
{
  if (!(scale > 0.0 && scale <= 64.0))
    throw UsageError("--scale must lie in (0, 64]");
}

// Runs `fn` and turns argument-validation failures into usage errors.
template <class F>
void validated(F&& fn)
{
  try {
    fn();
  }
  catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  catch (const std::out_of_range& e) {
    throw UsageError(e.what());
  }
}

std::unique_ptr<nn::Generator> open_model(const std::string& path)
{
  return nn::load_generator(load_checkpoint(path));
}

} // namespace

void add_train(CLI::App& root, Registry& registry)
{
  struct Opts {
    std::string manifest, out, log, feature_bank;
    double scale = 1.0;
    int split = 60;
    double p = 0.5;
    double lr = 1e-3;
    double lambda_feat = 0.5, lambda_l1 = 1.0, lambda_mse = 0.04, lambda_gan = 0.05;
    int batch = 15;
    int patch = 128;
    int patches_per_image = 1;
    int epochs = 20;
    std::uint64_t max_steps = 0;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* app = root.add_subcommand("train", "Train the generator and discriminator on a manifest");
  app->add_option("--manifest", o->manifest, "Manifest of hazy<TAB>clear pairs")->required();
  app->add_option("--out", o->out, "Checkpoint path")->required();
  app->add_option("--log", o->log, "Loss log CSV (default <out>.loss.csv)");
  app->add_option("--feature-bank", o->feature_bank, "Checkpoint file holding feature.stage<i> weights");
  app->add_option("--scale", o->scale, "Width multiplier")->capture_default_str();
  app->add_option("--split", o->split, "Split point T between low and high bands")->capture_default_str();
  app->add_option("--p", o->p, "Binomial parameter of the fixed transform")->capture_default_str();
  app->add_option("--lr", o->lr, "Adam learning rate")->capture_default_str();
  app->add_option("--lambda-feat", o->lambda_feat, "Feature loss weight")->capture_default_str();
  app->add_option("--lambda-l1", o->lambda_l1, "Smooth L1 weight")->capture_default_str();
  app->add_option("--lambda-mse", o->lambda_mse, "MSE weight")->capture_default_str();
  app->add_option("--lambda-gan", o->lambda_gan, "Adversarial weight")->capture_default_str();
  app->add_option("--batch", o->batch, "Patches per step")->capture_default_str();
  app->add_option("--patch", o->patch, "Patch size")->capture_default_str();
  app->add_option("--patches-per-image", o->patches_per_image, "Patches drawn per image per epoch")
      ->capture_default_str();
  app->add_option("--epochs", o->epochs, "Epochs")->capture_default_str();
  app->add_option("--max-steps", o->max_steps, "Stop after this many steps (0: run all epochs)")
      ->capture_default_str();

  registry.push_back(
      {app,
       [o](Context& ctx) {
         check_scale(o->scale);
         nn::GeneratorConfig gen_cfg;
         nn::TrainConfig train_cfg;
         validated([&] {
           gen_cfg = nn::GeneratorConfig::at_scale(o->scale, o->split, o->p);
           gen_cfg.validate();
           train_cfg.weights = {o->lambda_feat, o->lambda_l1, o->lambda_mse, o->lambda_gan};
           train_cfg.adam.lr = o->lr;
           train_cfg.batch = o->batch;
           train_cfg.patch = o->patch;
           train_cfg.patches_per_image = o->patches_per_image;
           train_cfg.epochs = o->epochs;
           train_cfg.max_steps = o->max_steps;
           train_cfg.validate();
         });
         if (train_cfg.patch % gen_cfg.size_multiple() != 0)
           throw UsageError("--patch must be a multiple of " + std::to_string(gen_cfg.size_multiple()));

         nn::TrainingSet set;
         for (const auto& [hazy, clear] : load_manifest(o->manifest).pairs) {
           nn::TrainingPair pair{load_gray(hazy), load_gray(clear)};
           if (pair.hazy.rows() != pair.clear.rows() || pair.hazy.cols() != pair.clear.cols())
             throw FormatError("size mismatch between " + hazy.string() + " and " + clear.string());
           set.push_back(std::move(pair));
         }

         std::unique_ptr<nn::FeatureBank> bank;
         if (!o->feature_bank.empty())
           bank = std::make_unique<nn::FeatureBank>(load_checkpoint(o->feature_bank));
         nn::ModelState state(gen_cfg, nn::Discriminator::width_at_scale(o->scale), ctx.seed, std::move(bank));

         const fs::path log_path = o->log.empty() ? fs::path(o->out + ".loss.csv") : fs::path(o->log);
         std::ofstream log = open_output(log_path);
         nn::write_loss_log_header(log);
         const auto records = nn::train(state, set, train_cfg, [&](const nn::StepRecord& r) {
           nn::write_loss_log_row(log, r);
           log.flush();
         });
         save_checkpoint(state.to_checkpoint(), o->out);

         json summary{{"steps", records.size()}, {"checkpoint", o->out}, {"loss_log", log_path.string()}};
         if (!records.empty()) {
           summary["smooth_l1_first"] = records.front().smooth_l1;
           summary["smooth_l1_last"] = records.back().smooth_l1;
         }
         write_json_line(ctx.out, summary);
       },
       [o] { return fs::path(o->out); }});
}

void add_dehaze(CLI::App& root, Registry& registry)
{
  struct Opts {
    std::string model, baseline, in, out;
    double t0 = 0.1;
    int dcp_patch = 15;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* app = root.add_subcommand("dehaze", "Dehaze one image with a trained model or the DCP baseline");
  app->add_option("--model", o->model, "Checkpoint from train");
  app->add_option("--baseline", o->baseline, "Run a baseline instead of a model: dcp");
  app->add_option("--in", o->in, "Hazy image")->required();
  app->add_option("--out", o->out, "Output image")->required();
  app->add_option("--t0", o->t0, "DCP transmission floor")->capture_default_str();
  app->add_option("--dcp-patch", o->dcp_patch, "DCP dark-channel window")->capture_default_str();

  registry.push_back({app,
                      [o](Context& ctx) {
                        if (o->model.empty() == o->baseline.empty())
                          throw UsageError("give exactly one of --model and --baseline");
                        if (!o->baseline.empty() && o->baseline != "dcp")
                          throw UsageError("unknown baseline '" + o->baseline + "'");
                        const PlanarImage image = load_image(o->in);
                        PlanarImage result;
                        if (o->baseline == "dcp") {
                          validated([&] { result = dehaze_with_dcp(image, o->t0, o->dcp_patch); });
                        }
                        else {
                          auto gen = open_model(o->model);
                          result = dehaze_with_model(*gen, image);
                        }
                        save_image(result, o->out);
                        write_json_line(ctx.out, {{"out", o->out},
                                                  {"rows", result.height()},
                                                  {"cols", result.width()},
                                                  {"method", o->baseline.empty() ? "model" : o->baseline}});
                      },
                      [o] { return fs::path(o->out); }});
}

void add_evaluate(CLI::App& root, Registry& registry)
{
  struct Opts {
    std::string pred_dir, gt_dir, manifest, model, baseline, out;
    bool y_only = false;
    double t0 = 0.1;
    int dcp_patch = 15;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* app = root.add_subcommand(
      "evaluate", "PSNR/SSIM of predictions against ground truth, or of a method over a manifest");
  app->add_option("--pred-dir", o->pred_dir, "Directory of predicted images");
  app->add_option("--gt-dir", o->gt_dir, "Directory of ground-truth images with matching names");
  app->add_option("--manifest", o->manifest, "Manifest; hazy inputs are dehazed and compared with clear");
  app->add_option("--model", o->model, "Checkpoint used with --manifest");
  app->add_option("--baseline", o->baseline, "Used with --manifest: dcp, or none to score the hazy input");
  app->add_option("--out", o->out, "metrics.csv path")->required();
  app->add_flag("--y-only", o->y_only, "Score the luma plane instead of RGB");
  app->add_option("--t0", o->t0, "DCP transmission floor")->capture_default_str();
  app->add_option("--dcp-patch", o->dcp_patch, "DCP dark-channel window")->capture_default_str();

  registry.push_back(
      {app,
       [o](Context& ctx) {
         const bool dir_mode = !o->pred_dir.empty() || !o->gt_dir.empty();
         if (dir_mode == !o->manifest.empty())
           throw UsageError("give either --pred-dir/--gt-dir or --manifest");
         if (dir_mode && (!o->model.empty() || !o->baseline.empty()))
           throw UsageError("--model and --baseline apply only with --manifest");
         if (!dir_mode && !o->model.empty() && !o->baseline.empty())
           throw UsageError("give at most one of --model and --baseline");
         if (!o->baseline.empty() && o->baseline != "dcp" && o->baseline != "none")
           throw UsageError("unknown baseline '" + o->baseline + "'");

         std::unique_ptr<nn::Generator> gen;
         if (!o->model.empty())
           gen = open_model(o->model);

         std::vector<std::pair<fs::path, fs::path>> pairs =
             dir_mode ? image_pairs("", o->pred_dir, o->gt_dir) : load_manifest(o->manifest).pairs;

         std::ofstream os = open_output(o->out);
         os << "image,psnr_db,ssim\n";
         double sum_psnr = 0.0, sum_ssim = 0.0;
         for (const auto& [first, gt_path] : pairs) {
           const PlanarImage input = load_image(first);
           PlanarImage pred;
           if (gen)
             pred = dehaze_with_model(*gen, input);
           else if (o->baseline == "dcp")
             validated([&] { pred = dehaze_with_dcp(input, o->t0, o->dcp_patch); });
           else
             pred = input;
           const PlanarImage gt = load_image(gt_path);
           const PlanarImage a = metric_view(pred, o->y_only || gt.colorspace == ColorSpace::Y);
           const PlanarImage b = metric_view(gt, o->y_only || pred.colorspace == ColorSpace::Y);
           const MetricReport m = evaluate_pair(a, b);
           sum_psnr += m.psnr;
           sum_ssim += m.ssim;
           os << first.filename().string() << ',' << format_real(m.psnr) << ',' << format_real(m.ssim) << '\n';
         }
         const double n = static_cast<double>(pairs.size());
         os << "MEAN," << format_real(sum_psnr / n) << ',' << format_real(sum_ssim / n) << '\n';
         write_json_line(ctx.out, {{"images", pairs.size()},
                                   {"mean_psnr_db", sum_psnr / n},
                                   {"mean_ssim", sum_ssim / n},
                                   {"out", o->out}});
       },
       [o] { return fs::path(o->out); }});
}

void add_gradcheck(CLI::App& root, Registry& registry)
{
  struct Opts {
    double scale = 1.0;
    int size = 16;
    int batch = 2;
    int split = 60;
    std::size_t samples = 3;
    double eps = 1e-4;
    double sigma = 0.01;
    double tolerance = 1e-4;
    std::string target = "both";
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* app = root.add_subcommand("gradcheck", "Finite-difference check of generator and discriminator gradients");
  app->add_option("--scale", o->scale, "Width multiplier")->capture_default_str();
  app->add_option("--size", o->size, "Input height and width")->capture_default_str();
  app->add_option("--batch", o->batch, "Inputs per check")->capture_default_str();
  app->add_option("--split", o->split, "Split point T")->capture_default_str();
  app->add_option("--samples", o->samples, "Entries probed per tensor (0: all)")->capture_default_str();
  app->add_option("--eps", o->eps, "Finite-difference step")->capture_default_str();
  app->add_option("--sigma", o->sigma, "Noise added to the initial weights")->capture_default_str();
  app->add_option("--tolerance", o->tolerance, "Largest accepted relative error")->capture_default_str();
  app->add_option("--target", o->target, "generator, discriminator or both")->capture_default_str();
  app->add_option("--out", o->out, "Optional CSV of every probe");

  registry.push_back(
      {app,
       [o](Context& ctx) {
         check_scale(o->scale);
         if (o->target != "generator" && o->target != "discriminator" && o->target != "both")
           throw UsageError("--target must be generator, discriminator or both");
         if (o->batch < 1 || o->size < 16 || !(o->eps > 0.0) || !(o->sigma >= 0.0))
           throw UsageError("need --batch >= 1, --size >= 16, --eps > 0, --sigma >= 0");

         std::mt19937_64 rng(ctx.seed);
         std::uniform_real_distribution<double> unit(0.0, 1.0);
         nn::Tensor input({o->batch, 1, o->size, o->size});
         for (double& v : input.values())
           v = unit(rng);

         nn::GradCheckOptions opts;
         opts.eps = o->eps;
         opts.samples_per_tensor = o->samples;
         opts.directional = true;
         opts.seed = ctx.seed;

         std::vector<std::pair<std::string, nn::GradCheckReport>> reports;
         if (o->target != "discriminator") {
           nn::GeneratorConfig cfg;
           validated([&] {
             cfg = nn::GeneratorConfig::at_scale(o->scale, o->split);
             cfg.clamp_output = false;
             cfg.validate();
           });
           if (o->size % cfg.size_multiple() != 0)
             throw UsageError("--size must be a multiple of " + std::to_string(cfg.size_multiple()));
           nn::Generator gen(cfg, ctx.seed);
           nn::perturb_trainable(gen.params(), ctx.seed + 1, o->sigma);
           const nn::Tensor probe = nn::random_probe(input.shape(), ctx.seed + 2);
           reports.emplace_back("generator", nn::gradient_check(
                                                 {&gen.params()},
                                                 [&](nn::Tape& t) {
                                                   return nn::dot(t, gen.forward(t, t.constant(input), true), probe);
                                                 },
                                                 opts));
         }
         if (o->target != "generator") {
           nn::Discriminator disc(nn::Discriminator::width_at_scale(o->scale), ctx.seed);
           const nn::Tensor probe = nn::random_probe({o->batch, 1, 1, 1}, ctx.seed + 3);
           reports.emplace_back("discriminator",
                                nn::gradient_check(
                                    {&disc.params()},
                                    [&](nn::Tape& t) { return nn::dot(t, disc.forward(t, t.constant(input)), probe); },
                                    opts));
         }

         json summary = json::object();
         double worst = 0.0;
         for (const auto& [name, r] : reports) {
           summary[name] = {{"max_relative_error", r.max_relative_error},
                            {"worst_tensor", r.worst.tensor},
                            {"worst_index", r.worst.index},
                            {"probes", r.probes},
                            {"tensors", r.tensors.size()}};
           worst = std::max(worst, r.max_relative_error);
         }
         summary["max_relative_error"] = worst;
         summary["tolerance"] = o->tolerance;
         summary["passed"] = worst < o->tolerance;

         if (!o->out.empty()) {
           std::ofstream os = open_output(o->out);
           os << "network,tensor,index,analytic,numeric,relative_error\n";
           for (const auto& [name, r] : reports)
             for (const nn::GradCheckEntry& e : r.entries)
               os << name << ',' << e.tensor << ',' << e.index << ',' << format_real(e.analytic) << ','
                  << format_real(e.numeric) << ',' << format_real(e.relative_error) << '\n';
         }
         write_json_line(ctx.out, summary);
         if (!(worst < o->tolerance))
           throw std::runtime_error("gradient check failed: max relative error " + format_real(worst));
       },
       [o] { return fs::path(o->out); }});
}

} // namespace krawtex::cli
