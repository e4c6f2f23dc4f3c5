#include "common.hpp"

#include "krawtex/block_transform.hpp"
#include "krawtex/dataio.hpp"
#include "krawtex/format.hpp"
#include "krawtex/haze.hpp"
#include "krawtex/synthetic.hpp"

#include <cmath>
#include <iomanip>
#include <memory>
#include <sstream>

namespace krawtex::cli {

namespace {

KclMode parse_mode(const std::string& name)
{
  if (name == "block")
    return KclMode::Block;
  if (name == "sliding")
    return KclMode::Sliding;
  throw UsageError("mode must be 'block' or 'sliding', got '" + name + "'");
}

BasisSet make_basis(double p)
{
  if (!(p > 0.0 && p < 1.0))
    throw UsageError("--p must lie in (0, 1)");
  return basis_set(KrawtchoukParams(p, BasisSet::kBlock));
}

Airlight parse_airlight(const std::string& text)
{
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size())
        throw std::invalid_argument(item);
    }
    catch (const std::exception&) {
      throw UsageError("--airlight expects one or three numbers, got '" + text + "'");
    }
  }
  if (v.size() == 1)
    return {v[0], v[0], v[0]};
  if (v.size() == 3)
    return {v[0], v[1], v[2]};
  throw UsageError("--airlight expects one or three numbers, got '" + text + "'");
}

std::uint64_t item_seed(std::uint64_t seed, std::uint64_t index)
{
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

} // namespace

void add_basis(CLI::App& root, Registry& registry)
{
  struct Opts {
    double p = 0.5;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* app = root.add_subcommand("basis", "Write the 64 zig-zag ordered 8x8 basis filters as CSV");
  app->add_option("--p", o->p, "Binomial parameter")->capture_default_str();
  app->add_option("--out", o->out, "CSV path")->required();

  registry.push_back({app,
                      [o](Context& ctx) {
                        const BasisSet basis = make_basis(o->p);
                        std::ofstream os = open_output(o->out);
                        os << "index,i,j";
                        for (int a = 0; a < BasisSet::kBlock; ++a)
                          for (int b = 0; b < BasisSet::kBlock; ++b)
                            os << ",v" << a << b;
                        os << '\n';
                        for (int k = 0; k < BasisSet::kCount; ++k) {
                          os << k << ',' << basis.order[k].first << ',' << basis.order[k].second;
                          const Eigen::MatrixXd& f = basis.filters[k];
                          for (int a = 0; a < BasisSet::kBlock; ++a)
                            for (int b = 0; b < BasisSet::kBlock; ++b)
                              os << ',' << format_real(f(a, b));
                          os << '\n';
                        }
                        write_json_line(ctx.out, {{"filters", BasisSet::kCount}, {"out", o->out}});
                      },
                      [o] { return fs::path(o->out); }});
}

void add_analyze(CLI::App& root, Registry& registry)
{
  struct Opts {
    std::string manifest, hazy_dir, clear_dir, out;
    double p = 0.5;
    std::string mode = "block";
  };
  auto o = std::make_shared<Opts>();
  CLI::App* app = root.add_subcommand("analyze", "Per-band coefficient statistics over hazy/clear pairs");
  app->add_option("--manifest", o->manifest, "Manifest of hazy<TAB>clear pairs");
  app->add_option("--hazy-dir", o->hazy_dir, "Directory of hazy images");
  app->add_option("--clear-dir", o->clear_dir, "Directory of clear images with matching names");
  app->add_option("--out", o->out, "band_stats.csv path")->required();
  app->add_option("--p", o->p, "Binomial parameter")->capture_default_str();
  app->add_option("--mode", o->mode, "block or sliding")->capture_default_str();

  registry.push_back(
      {app,
       [o](Context& ctx) {
         const KclMode mode = parse_mode(o->mode);
         const BasisSet basis = make_basis(o->p);
         BandStatsAccumulator acc;
         for (const auto& [hazy, clear] : image_pairs(o->manifest, o->hazy_dir, o->clear_dir)) {
           const Channel h = load_gray(hazy);
           const Channel c = load_gray(clear);
           if (h.rows() != c.rows() || h.cols() != c.cols())
             throw FormatError("size mismatch between " + hazy.string() + " and " + clear.string());
           acc.add(kcl_apply(h, basis, mode), kcl_apply(c, basis, mode));
         }
         const std::vector<BandStats> stats = acc.stats();
         std::ofstream os = open_output(o->out);
         write_band_stats_csv(os, stats);

         double low = 0.0, high = 0.0;
         for (int k = 0; k < 8; ++k) {
           low += stats[k].mean_abs_diff / 8.0;
           high += stats[BasisSet::kCount - 8 + k].mean_abs_diff / 8.0;
         }
         write_json_line(ctx.out, {{"pairs", acc.pairs()},
                                   {"mean_abs_diff_bands_0_7", low},
                                   {"mean_abs_diff_bands_56_63", high},
                                   {"out", o->out}});
       },
       [o] { return fs::path(o->out); }});
}

void add_transform(CLI::App& root, Registry& registry)
{
  struct Opts {
    std::string in, out;
    double p = 0.5;
    std::string mode = "block";
    bool roundtrip = false;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* app = root.add_subcommand("transform", "Forward transform of one image with roundtrip diagnostics");
  app->add_option("--in", o->in, "Input image")->required();
  app->add_option("--out", o->out, "Optional CSV of per-band statistics");
  app->add_option("--p", o->p, "Binomial parameter")->capture_default_str();
  app->add_option("--mode", o->mode, "block or sliding")->capture_default_str();
  app->add_flag("--roundtrip", o->roundtrip, "Invert the transform and report the reconstruction error");

  registry.push_back(
      {app,
       [o](Context& ctx) {
         const KclMode mode = parse_mode(o->mode);
         const BasisSet basis = make_basis(o->p);
         const PlanarImage image = load_image(o->in);
         json report{{"channels", image.channel_count()},
                     {"rows", image.height()},
                     {"cols", image.width()},
                     {"mode", o->mode},
                     {"bands", BasisSet::kCount}};

         double roundtrip = 0.0, parseval = 0.0;
         std::vector<double> band_abs(BasisSet::kCount, 0.0), band_energy(BasisSet::kCount, 0.0);
         for (const Channel& c : image.channels) {
           const FrequencyCube cube = kcl_apply(c, basis, mode);
           for (int k = 0; k < BasisSet::kCount; ++k) {
             band_abs[k] += cube.maps[k].cwiseAbs().mean() / image.channel_count();
             band_energy[k] += cube.maps[k].squaredNorm();
           }
           if (!o->roundtrip)
             continue;
           const Channel back = mode == KclMode::Block ? ikcl_exact(cube, basis) : ikcl_sliding_exact(cube, basis);
           roundtrip = std::max(roundtrip, (back - c).cwiseAbs().maxCoeff());
           if (mode == KclMode::Block) {
             const int b = BasisSet::kBlock;
             const Channel padded =
                 pad_symmetric(c, round_up(static_cast<int>(c.rows()), b), round_up(static_cast<int>(c.cols()), b));
             for (int by = 0; by < padded.rows() / b; ++by)
               for (int bx = 0; bx < padded.cols() / b; ++bx) {
                 double coef = 0.0;
                 for (const Channel& m : cube.maps)
                   coef += m(by, bx) * m(by, bx);
                 parseval = std::max(parseval, std::abs(coef - padded.block(by * b, bx * b, b, b).squaredNorm()));
               }
           }
         }
         if (o->roundtrip) {
           report["max_roundtrip_error"] = roundtrip;
           if (mode == KclMode::Block)
             report["max_parseval_error"] = parseval;
         }
         if (!o->out.empty()) {
           std::ofstream os = open_output(o->out);
           os << "band,i,j,mean_abs,energy\n";
           for (int k = 0; k < BasisSet::kCount; ++k)
             os << k << ',' << basis.order[k].first << ',' << basis.order[k].second << ','
                << format_real(band_abs[k]) << ',' << format_real(band_energy[k]) << '\n';
           report["out"] = o->out;
         }
         write_json_line(ctx.out, report);
       },
       [o] { return fs::path(o->out); }});
}

void add_synthesize(CLI::App& root, Registry& registry)
{
  struct Opts {
    std::string clear, depth, out, transmission_out;
    double beta = 1.0;
    std::string airlight = "0.8";
    double depth_max = 1.0;
    std::string depth_kind = "ramp";
  };
  auto o = std::make_shared<Opts>();
  CLI::App* app = root.add_subcommand("synthesize", "Haze a clear image with the scattering model");
  app->add_option("--clear", o->clear, "Clear image")->required();
  app->add_option("--depth", o->depth, "Depth image (gray, rescaled to [0, depth-max])");
  app->add_option("--beta", o->beta, "Scattering coefficient")->capture_default_str();
  app->add_option("--airlight", o->airlight, "Airlight, one value or R,G,B")->capture_default_str();
  app->add_option("--depth-max", o->depth_max, "Depth range upper end")->capture_default_str();
  app->add_option("--depth-kind", o->depth_kind, "Synthetic depth when --depth is absent: ramp, radial, smooth")
      ->capture_default_str();
  app->add_option("--out", o->out, "Hazy image path")->required();
  app->add_option("--transmission-out", o->transmission_out, "Optional transmission map image");

  registry.push_back(
      {app,
       [o](Context& ctx) {
         if (!(o->beta > 0.0) || !(o->depth_max >= 0.0))
           throw UsageError("need --beta > 0 and --depth-max >= 0");
         HazeScene scene;
         scene.clear = load_image(o->clear);
         scene.beta = o->beta;
         scene.airlight = parse_airlight(o->airlight);
         const int rows = scene.clear.height();
         const int cols = scene.clear.width();
         if (!o->depth.empty()) {
           const Channel d = load_gray(o->depth);
           if (d.rows() != rows || d.cols() != cols)
             throw FormatError("depth image size differs from the clear image");
           scene.depth = d * o->depth_max;
         }
         else {
           DepthKind kind;
           try {
             kind = parse_depth_kind(o->depth_kind);
           }
           catch (const std::exception& e) {
             throw UsageError(e.what());
           }
           scene.depth = synthetic_depth(rows, cols, kind, ctx.seed, o->depth_max);
         }
         save_image(synthesize_haze(scene), o->out);
         const Channel t = transmission_from_depth(scene.depth, scene.beta);
         if (!o->transmission_out.empty())
           save_image(PlanarImage({t}, ColorSpace::Y), o->transmission_out);
         write_json_line(ctx.out, {{"out", o->out},
                                   {"transmission_min", t.minCoeff()},
                                   {"transmission_max", t.maxCoeff()}});
       },
       [o] { return fs::path(o->out); }});
}

void add_toyset(CLI::App& root, Registry& registry)
{
  struct Opts {
    std::string out_dir;
    int count = 50;
    int size = 64;
    double airlight = 0.8;
    double t_min = 0.3;
    double t_max = 0.7;
  };
  auto o = std::make_shared<Opts>();
  CLI::App* app = root.add_subcommand("toyset", "Write procedural hazy/clear pairs and a manifest");
  app->add_option("--out-dir", o->out_dir, "Output directory")->required();
  app->add_option("--count", o->count, "Number of pairs")->capture_default_str();
  app->add_option("--size", o->size, "Image height and width")->capture_default_str();
  app->add_option("--airlight", o->airlight, "Gray airlight")->capture_default_str();
  app->add_option("--t-min", o->t_min, "Lowest transmission")->capture_default_str();
  app->add_option("--t-max", o->t_max, "Highest transmission")->capture_default_str();

  registry.push_back({app,
                      [o](Context& ctx) {
                        if (o->count < 1 || o->size < 8)
                          throw UsageError("need --count >= 1 and --size >= 8");
                        ToyHazeOptions haze{o->airlight, o->t_min, o->t_max};
                        if (!(haze.t_min > 0.0 && haze.t_min <= haze.t_max && haze.t_max <= 1.0))
                          throw UsageError("need 0 < t-min <= t-max <= 1");
                        const fs::path dir = o->out_dir;
                        fs::create_directories(dir / "hazy");
                        fs::create_directories(dir / "clear");
                        DatasetManifest manifest;
                        for (int i = 0; i < o->count; ++i) {
                          const ToyPair pair = toy_pair(o->size, o->size, item_seed(ctx.seed, i), haze);
                          std::ostringstream name;
                          name << std::setw(4) << std::setfill('0') << i << ".png";
                          save_image(pair.hazy, dir / "hazy" / name.str());
                          save_image(pair.clear, dir / "clear" / name.str());
                          manifest.pairs.emplace_back(dir / "hazy" / name.str(), dir / "clear" / name.str());
                        }
                        write_manifest(manifest, dir / "manifest.txt");
                        write_json_line(ctx.out, {{"pairs", o->count},
                                                  {"manifest", (dir / "manifest.txt").string()}});
                      },
                      [o] { return fs::path(o->out_dir) / "manifest.txt"; }});
}

} // namespace krawtex::cli
