// Command-line front end: one subcommand per pipeline mode, all driven by a
// single JSON config.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "defres/errors.hpp"
#include "defres/run.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kConvergence = 3, kPrecondition = 4 };

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Defect modes, resonances and truncation asymptotics of 1D periodic Schrodinger operators"};
    app.require_subcommand(1);

    std::string config_path;
    defres::RunContext ctx;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out-dir", ctx.out_dir, "directory for output files")->capture_default_str();
        sub->add_option("--threads", ctx.threads, "parallel solves in sweeps")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_flag("--verbose", ctx.verbose, "progress on stderr");
    };
    const std::pair<const char*, const char*> commands[] = {
        {"run", "run the mode named in the config"},
        {"bands", "band/gap scan of the periodic background"},
        {"defect", "defect eigenvalues and profiles"},
        {"resonance", "resonance of the truncated structure (E > 0)"},
        {"bound", "perturbed bound state of the truncated structure (E < 0)"},
        {"edge", "edge state of a half-line structure truncated at +M"},
        {"sweep", "M-sweep with rate fits"},
    };
    for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        defres::RunConfig cfg = defres::load_config(config_path);
        if (command != "run") {
            cfg.mode = defres::parse_run_mode(command);
            defres::finalize(cfg);
        }
        const defres::RunOutput out = defres::run(cfg, ctx);
        std::cout << defres::to_text(out.summary);
        return kOk;
    } catch (const defres::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const defres::PreconditionError& e) {
        std::cerr << "precondition violated: " << e.what() << "\n";
        return kPrecondition;
    } catch (const defres::ConvergenceError& e) {
        std::cerr << "solver did not converge: " << e.what() << "\n";
        return kConvergence;
    } catch (const defres::IntegrationError& e) {
        std::cerr << "integration failed: " << e.what() << "\n";
        return kConvergence;
    }
}
