#ifndef CFIO_VERIFY_HPP
#define CFIO_VERIFY_HPP

#include "cfio/carnot.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cfio {

// One invariant measured over a batch of seeded cases.  value is the worst
// case of the measured error and passes when value <= tol.
struct Check {
    std::string key;   // suite.name
    double value = 0.0;
    double tol = 0.0;
    int cases = 0;
    double refine_error = -1.0; // quadrature-based checks only
    bool pass = false;
};

struct VerifyOptions {
    std::uint64_t seed = 1;
    std::map<std::string, double> tol; // overrides by check key
    int cases = 8;                     // random cases per check
    int jobs = 1;                      // worker threads for the case loops
    bool fio = true;                   // include the quadrature-based fio checks
};

struct CheckInfo {
    std::string key;
    double default_tol = 0.0;
    std::string description;
};

// every registered check, in report order
const std::vector<CheckInfo>& check_catalog();

// throws InputError for unknown keys or nonpositive/NaN tolerances
void validate_overrides(const std::map<std::string, double>& tol);

// whether the check applies to the group (H-type only, Metivier only, ...)
bool check_applies(const std::string& key, const Group2Step& g, const GroupClassification& cls);

// runs one check; cases overrides opt.cases when positive
Check run_check(const std::string& key, const Group2Step& g, const VerifyOptions& opt, int cases = 0);

struct VerifyReport {
    std::string group;
    std::uint64_t seed = 0;
    GroupClassification classification;
    std::vector<Check> checks;
    std::vector<std::string> skipped; // keys not applicable to the group
    bool pass() const;
};

// the carnot checks only
VerifyReport verify_group(const Group2Step& g, const VerifyOptions& opt);
// every applicable check
VerifyReport verify_all(const Group2Step& g, const VerifyOptions& opt);

// deterministic JSON text (sorted keys, shortest round-trip doubles)
std::string report_json(const VerifyReport& r);

} // namespace cfio

#endif
