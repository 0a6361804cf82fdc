#include "prodisp/scenario.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "prodisp/errors.hpp"

namespace prodisp {

double TomlValue::as_number() const {
    if (type == Type::Integer) return static_cast<double>(i);
    if (type == Type::Float) return f;
    throw ValidationError("scenario: expected a number");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

TomlValue parse_scalar(const std::string& raw, long line_no) {
    const std::string s = trim(raw);
    if (s.empty()) throw ValidationError("scenario line " + std::to_string(line_no) + ": empty value");
    TomlValue v;
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw ValidationError("scenario line " + std::to_string(line_no) +
                                  ": unterminated string");
        v.type = TomlValue::Type::String;
        v.s = s.substr(1, s.size() - 2);
        return v;
    }
    if (s == "true" || s == "false") {
        v.type = TomlValue::Type::Boolean;
        v.b = s == "true";
        return v;
    }
    // number: integer when it parses fully without . e inf nan
    const bool looks_int = s.find_first_of(".eEnN") == std::string::npos;
    char* end = nullptr;
    if (looks_int) {
        v.type = TomlValue::Type::Integer;
        v.i = std::strtoll(s.c_str(), &end, 10);
        if (end && *end == '\0') return v;
    }
    v.type = TomlValue::Type::Float;
    v.f = std::strtod(s.c_str(), &end);
    if (!end || *end != '\0')
        throw ValidationError("scenario line " + std::to_string(line_no) + ": bad value \"" + s +
                              "\"");
    return v;
}

TomlValue parse_value(const std::string& raw, long line_no) {
    const std::string s = trim(raw);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']')
            throw ValidationError("scenario line " + std::to_string(line_no) +
                                  ": arrays must close on the same line");
        TomlValue v;
        v.type = TomlValue::Type::Array;
        const std::string body = s.substr(1, s.size() - 2);
        std::size_t start = 0;
        bool in_string = false;
        for (std::size_t i = 0; i <= body.size(); ++i) {
            if (i < body.size() && body[i] == '"') in_string = !in_string;
            if (i == body.size() || (body[i] == ',' && !in_string)) {
                const std::string part = trim(body.substr(start, i - start));
                if (!part.empty()) v.array.push_back(parse_scalar(part, line_no));
                start = i + 1;
            }
        }
        return v;
    }
    return parse_scalar(s, line_no);
}

} // namespace

TomlDocument parse_toml(const std::string& text) {
    TomlDocument doc;
    TomlTable* current = &doc.root;
    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValidationError("scenario line " + std::to_string(line_no) +
                                      ": malformed table header");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty())
                throw ValidationError("scenario line " + std::to_string(line_no) +
                                      ": empty table name");
            current = &doc.tables[name];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("scenario line " + std::to_string(line_no) +
                                  ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ValidationError("scenario line " + std::to_string(line_no) + ": empty key");
        (*current)[key] = parse_value(line.substr(eq + 1), line_no);
    }
    return doc;
}

Scenario Scenario::parse(const std::string& text) {
    Scenario sc;
    sc.doc_ = parse_toml(text);
    const auto& root = sc.doc_.root;
    if (auto it = root.find("seed"); it != root.end())
        sc.seed = static_cast<std::uint64_t>(it->second.i);
    if (auto it = root.find("out"); it != root.end()) sc.out_dir = it->second.s;
    if (auto it = root.find("trim_top"); it != root.end())
        sc.trim_top = static_cast<long>(it->second.i);
    return sc;
}

Scenario Scenario::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("scenario: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

bool Scenario::has_table(const std::string& name) const {
    return doc_.tables.count(name) > 0;
}

const TomlTable& Scenario::table(const std::string& name) const {
    const auto it = doc_.tables.find(name);
    if (it == doc_.tables.end())
        throw ValidationError("scenario: missing required block [" + name + "]");
    return it->second;
}

namespace {

const TomlValue* find(const TomlTable& t, const std::string& key) {
    const auto it = t.find(key);
    return it == t.end() ? nullptr : &it->second;
}

} // namespace

double Scenario::num(const std::string& tname, const std::string& key) const {
    const TomlValue* v = find(table(tname), key);
    if (!v) throw ValidationError("scenario: missing key " + tname + "." + key);
    return v->as_number();
}

double Scenario::num_or(const std::string& tname, const std::string& key, double fallback) const {
    if (!has_table(tname)) return fallback;
    const TomlValue* v = find(table(tname), key);
    return v ? v->as_number() : fallback;
}

long Scenario::integer_or(const std::string& tname, const std::string& key, long fallback) const {
    if (!has_table(tname)) return fallback;
    const TomlValue* v = find(table(tname), key);
    return v ? static_cast<long>(v->as_number()) : fallback;
}

std::string Scenario::str_or(const std::string& tname, const std::string& key,
                             const std::string& fallback) const {
    if (!has_table(tname)) return fallback;
    const TomlValue* v = find(table(tname), key);
    if (!v) return fallback;
    if (v->type != TomlValue::Type::String)
        throw ValidationError("scenario: " + tname + "." + key + " must be a string");
    return v->s;
}

bool Scenario::flag_or(const std::string& tname, const std::string& key, bool fallback) const {
    if (!has_table(tname)) return fallback;
    const TomlValue* v = find(table(tname), key);
    if (!v) return fallback;
    if (v->type != TomlValue::Type::Boolean)
        throw ValidationError("scenario: " + tname + "." + key + " must be true/false");
    return v->b;
}

std::vector<double> Scenario::numbers(const std::string& tname, const std::string& key) const {
    const TomlValue* v = find(table(tname), key);
    if (!v) throw ValidationError("scenario: missing key " + tname + "." + key);
    if (v->type != TomlValue::Type::Array)
        throw ValidationError("scenario: " + tname + "." + key + " must be an array");
    std::vector<double> out;
    out.reserve(v->array.size());
    for (const auto& e : v->array) out.push_back(e.as_number());
    return out;
}

FirmDistribution Scenario::firm_distribution() const {
    const std::string kind = str_or("firm", "kind", "");
    if (kind.empty()) throw ValidationError("scenario: [firm] block with a kind is required");
    if (kind == "pareto") return FirmDistribution::pareto(num("firm", "mu"), num_or("firm", "c0", 1.0));
    if (kind == "uniform-grid")
        return FirmDistribution::uniform_grid(num("firm", "delta_c"),
                                              static_cast<long>(num("firm", "count")));
    if (kind == "exponential") return FirmDistribution::exponential(num("firm", "lambda"));
    if (kind == "gb2") {
        GB2Params g;
        g.a = num("firm", "a");
        g.b = num("firm", "b");
        g.p = num("firm", "p");
        g.q = num("firm", "q");
        return FirmDistribution::gb2(g);
    }
    if (kind == "discrete-levels") return FirmDistribution::discrete_levels(numbers("firm", "levels"));
    if (kind == "empirical-sample") return FirmDistribution::empirical(numbers("firm", "values"));
    throw ValidationError("scenario: unknown firm kind \"" + kind + "\"");
}

MarkovConfig Scenario::markov_config() const {
    MarkovConfig cfg;
    if (const TomlValue* r = find(table("markov"), "cutoff_ratio")) {
        cfg = MarkovConfig::from_cutoff_ratio(
            num("markov", "rate_exponent"), r->as_number(), num_or("markov", "entry_rate", 1.0),
            num_or("markov", "a_minus", 1.0), integer_or("markov", "c_max", 0));
    } else {
        cfg.a_plus = num("markov", "a_plus");
        cfg.a_minus = num("markov", "a_minus");
        cfg.rate_exponent = num("markov", "rate_exponent");
        cfg.entry_rate = num_or("markov", "entry_rate", 1.0);
        cfg.c_max = integer_or("markov", "c_max", 0);
        if (cfg.c_max == 0) cfg.c_max = static_cast<long>(std::ceil(10.0 * cfg.c_star()));
    }
    cfg.impose_city_constraint = flag_or("markov", "impose_city_constraint", false);
    cfg.validate();
    return cfg;
}

SuperstatConfig Scenario::superstat_config() const {
    SuperstatConfig cfg;
    cfg.firm_dist = firm_distribution();
    if (cfg.firm_dist.kind() != FirmDistribution::Kind::Pareto)
        throw ValidationError("scenario: [superstat] requires a pareto [firm] block");
    const double mu = cfg.firm_dist.pareto_mu();
    if (const TomlValue* g = find(table("superstat"), "gamma"))
        cfg.gamma = g->as_number();
    else if (const TomlValue* d = find(table("superstat"), "delta"))
        cfg.gamma = gamma_of_delta(mu, d->as_number());
    else
        throw ValidationError("scenario: superstat needs gamma or delta");
    cfg.beta_max =
        num_or("superstat", "beta_max", 100.0 / cfg.firm_dist.unweighted_moment(1));
    cfg.validate();
    return cfg;
}

DemandLaw Scenario::demand_law() const {
    const FirmDistribution dist = firm_distribution();
    DemandLaw law;
    law.delta = num("demand", "delta");
    law.mu_f = dist.kind() == FirmDistribution::Kind::Pareto ? dist.pareto_mu() : 0.0;
    law.mean_ceiling = dist.unweighted_moment(1);
    const double lo = dist.support_lower_bound();
    law.d_lo = num_or("demand", "d_lo", 0.5 * (lo + law.mean_ceiling));
    law.validate();
    return law;
}

LaborShareLaw Scenario::labor_share() const {
    const std::string kind = str_or("labor_share", "kind", "uniform-interval");
    if (kind == "degenerate") return LaborShareLaw::degenerate(num("labor_share", "value"));
    if (kind == "uniform-interval")
        return LaborShareLaw::uniform(num_or("labor_share", "lo", 0.5),
                                      num_or("labor_share", "hi", 1.0));
    throw ValidationError("scenario: unknown labor share kind \"" + kind + "\"");
}

GenerateParams Scenario::generate_params() const {
    GenerateParams p;
    p.years = integer_or("generate", "years", p.years);
    p.firms = integer_or("generate", "firms", p.firms);
    p.workers = integer_or("generate", "workers", p.workers);
    p.periods_per_year = integer_or("generate", "periods_per_year", p.periods_per_year);
    p.sectors = integer_or("generate", "sectors", p.sectors);
    p.sector_rule = str_or("generate", "sector_rule", p.sector_rule);
    p.start_year = static_cast<int>(integer_or("generate", "start_year", p.start_year));
    if (p.years < 1 || p.firms < 1 || p.workers < 1 || p.periods_per_year < 1 || p.sectors < 1)
        throw ValidationError("scenario: [generate] sizes must be positive");
    if (p.sector_rule != "random" && p.sector_rule != "size-stratified")
        throw ValidationError("scenario: sector_rule must be random or size-stratified");
    return p;
}

} // namespace prodisp
