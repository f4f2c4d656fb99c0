#include "dagmc/cli.hpp"

#include <cstdio>
#include <exception>
#include <memory>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "dagmc/error.hpp"
#include "dagmc/io.hpp"
#include "dagmc/sampler.hpp"

namespace dagmc {

namespace {

std::string position_prefix(const std::string& source, const SyntaxError& e) {
  return source + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": ";
}

std::string format_vector(const std::vector<double>& v) {
  std::string out = "[";
  char buf[64];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, " %.6f", x);
    out += buf;
  }
  return out + " ]";
}

}  // namespace

lang::ModelFile load_model_files(const CliArgs& args) {
  if (args.model_paths.empty()) throw Error("no model file given");
  std::vector<lang::ModelFile> files;
  for (const auto& path : args.model_paths) {
    try {
      files.push_back(lang::parse_model_file(path));
    } catch (const SyntaxError& e) {
      throw Error(position_prefix(path.string(), e) + e.message());
    }
  }
  for (std::size_t i = 0; i < args.inline_overrides.size(); ++i) {
    try {
      files.push_back(lang::parse_model(args.inline_overrides[i]));
    } catch (const SyntaxError& e) {
      throw Error(position_prefix("-e #" + std::to_string(i + 1), e) + e.message());
    }
  }
  lang::ModelFile base = std::move(files.front());
  return lang::merge_overrides(std::move(base),
                               std::span<const lang::ModelFile>(files).subspan(1));
}

std::filesystem::path chain_trace_path(const std::filesystem::path& base, std::size_t index,
                                       std::size_t chains) {
  if (chains <= 1) return base;
  std::filesystem::path out = base;
  out.replace_filename(base.stem().string() + "_" + std::to_string(index + 1) +
                       base.extension().string());
  return out;
}

std::vector<RunReport> run_chains(const LoadedModel& model, std::uint64_t chains) {
  if (chains == 0) throw ModelError(ModelError::Kind::BadConfig, "--chains must be positive");
  std::vector<RunReport> reports(chains);
  std::vector<std::exception_ptr> errors(chains);
  const auto columns = trace_columns(model.graph);

  auto one_chain = [&](std::size_t i) {
    try {
      RunConfig cfg = model.config;
      cfg.seed = model.config.seed + i;
      std::unique_ptr<io::TraceSink> sink;
      std::vector<io::TraceSink*> sinks;
      if (cfg.outfile) {
        sink = io::open_trace(chain_trace_path(*cfg.outfile, i, chains), columns, cfg.thin);
        sinks.push_back(sink.get());
      }
      std::optional<FunctionalAccumulator> functional;
      if (model.functional) functional.emplace(model.graph, *model.functional);
      reports[i] = run(model.graph, model.blocks, cfg, functional ? &*functional : nullptr, sinks);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  if (chains == 1) {
    one_chain(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < chains; ++i) threads.emplace_back(one_chain, i);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

std::optional<std::vector<double>> pooled_average(const std::vector<RunReport>& reports) {
  std::optional<std::vector<double>> out;
  std::uint64_t total = 0;
  for (const auto& r : reports) {
    if (!r.functional_average) return std::nullopt;
    if (!out) out.emplace(r.functional_average->size(), 0.0);
    for (std::size_t k = 0; k < out->size(); ++k) {
      (*out)[k] += static_cast<double>(r.functional_samples) * (*r.functional_average)[k];
    }
    total += r.functional_samples;
  }
  if (out && total > 0) {
    for (double& v : *out) v /= static_cast<double>(total);
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Adaptive Metropolis-within-Gibbs sampler for DAG models", "dagmc");
  CliArgs cli;
  std::vector<std::string> paths;
  std::string out_path;
  app.add_option("models", paths, "Model files, merged in order")->required();
  app.add_option("-e", cli.inline_overrides, "Inline model fragment applied after the files")
      ->allow_extra_args(false);
  app.add_option("--seed", cli.seed, "Random seed");
  app.add_option("--out", out_path, "Trace file (.csv for text, anything else binary)");
  app.add_option("--thin", cli.thin, "Keep every k-th post-burn-in sample")
      ->check(CLI::PositiveNumber);
  app.add_option("--chains", cli.chains, "Independent chains with seeds seed, seed+1, ...")
      ->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  for (const auto& p : paths) cli.model_paths.emplace_back(p);
  if (!out_path.empty()) cli.out = out_path;

  try {
    LoadedModel model = load_model(load_model_files(cli));
    if (cli.seed) model.config.seed = *cli.seed;
    if (cli.thin) model.config.thin = *cli.thin;
    if (cli.out) model.config.outfile = *cli.out;
    model.config.validate();

    const auto reports = run_chains(model, cli.chains);
    for (const auto& w : reports.front().warnings) err << "warning: " << w << "\n";
    if (reports.size() == 1) {
      out << io::format_report(reports.front());
    } else {
      for (std::size_t i = 0; i < reports.size(); ++i) {
        out << "Chain " << i + 1 << " (seed " << model.config.seed + i << ")\n";
        out << io::format_report(reports[i]);
      }
      if (auto pooled = pooled_average(reports)) {
        out << "Pooled functional average = " << format_vector(*pooled) << "\n";
      }
    }
    return 0;
  } catch (const SyntaxError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 1;
}

}  // namespace dagmc
