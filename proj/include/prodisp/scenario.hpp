#ifndef PRODISP_SCENARIO_HPP
#define PRODISP_SCENARIO_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "prodisp/distribution.hpp"
#include "prodisp/margsim.hpp"
#include "prodisp/markov.hpp"
#include "prodisp/superstats.hpp"

namespace prodisp {

// Minimal strict TOML subset: [tables], key = value with strings,
// numbers, booleans and single-line arrays of scalars, # comments.
struct TomlValue {
    enum class Type { Boolean, Integer, Float, String, Array };
    Type type = Type::Integer;
    bool b = false;
    long long i = 0;
    double f = 0.0;
    std::string s;
    std::vector<TomlValue> array;

    double as_number() const;
};

using TomlTable = std::map<std::string, TomlValue>;

struct TomlDocument {
    TomlTable root;
    std::map<std::string, TomlTable> tables;
};

TomlDocument parse_toml(const std::string& text);

struct GenerateParams {
    long years = 20;
    long firms = 2000;
    long workers = 1000000; // endowment N per period
    long periods_per_year = 12;
    long sectors = 33;
    std::string sector_rule = "random"; // or "size-stratified"
    int start_year = 1981;
};

// Parsed scenario: global keys (seed, out, trim_top) plus one table per
// module block. Builders validate under the owning module's rules.
class Scenario {
  public:
    static Scenario parse(const std::string& text);
    static Scenario load_file(const std::string& path);

    std::uint64_t seed = 42;
    std::string out_dir = "out";
    long trim_top = 10;

    bool has_table(const std::string& name) const;
    const TomlTable& table(const std::string& name) const;

    // typed lookups with defaults; missing required keys raise
    // ValidationError naming table.key
    double num(const std::string& table, const std::string& key) const;
    double num_or(const std::string& table, const std::string& key, double fallback) const;
    long integer_or(const std::string& table, const std::string& key, long fallback) const;
    std::string str_or(const std::string& table, const std::string& key,
                       const std::string& fallback) const;
    bool flag_or(const std::string& table, const std::string& key, bool fallback) const;
    std::vector<double> numbers(const std::string& table, const std::string& key) const;

    FirmDistribution firm_distribution() const; // [firm]
    MarkovConfig markov_config() const;         // [markov]
    SuperstatConfig superstat_config() const;   // [superstat] + [firm]
    DemandLaw demand_law() const;               // [demand] + [firm]
    LaborShareLaw labor_share() const;          // [labor_share]
    GenerateParams generate_params() const;     // [generate]

  private:
    TomlDocument doc_;
};

} // namespace prodisp

#endif
