#ifndef PRODISP_PIPELINE_HPP
#define PRODISP_PIPELINE_HPP

#include <string>
#include <vector>

#include "json.hpp"
#include "prodisp/scenario.hpp"

namespace prodisp {

// Files are written into "<out>.tmp-partial" and the directory is renamed
// to <out> on success (replacing a previous run); on failure the partial
// directory is left in place for inspection.
class OutputDir {
  public:
    explicit OutputDir(const std::string& target);
    ~OutputDir();

    std::string path(const std::string& filename) const;
    void note_file(const std::string& filename);
    const std::vector<std::string>& manifest() const { return manifest_; }
    // atomic publish; no-op on second call
    void finalize();

  private:
    std::string target_;
    std::string tmp_;
    bool finalized_ = false;
    std::vector<std::string> manifest_;
};

using Json = nlohmann::ordered_json;

// CLI subcommand bodies; each writes its files into `out` and returns the
// summary that the CLI also saves as summary.json
Json cmd_equilibrium(const Scenario& sc, OutputDir& out);
Json cmd_stationary(const Scenario& sc, OutputDir& out);
Json cmd_simulate(const Scenario& sc, OutputDir& out);
Json cmd_superstat(const Scenario& sc, OutputDir& out);
Json cmd_fit(const Scenario& sc, const std::string& input_csv, OutputDir& out);
Json cmd_mcarlo(const Scenario& sc, OutputDir& out);
Json cmd_gen(const Scenario& sc, OutputDir& out);
Json cmd_pipeline(const Scenario& sc, OutputDir& out);

void write_json(const Json& j, const std::string& path);

} // namespace prodisp

#endif
