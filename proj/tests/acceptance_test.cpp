#include <iostream>

#include "mgpe/acceptance.hpp"

// Release gate: one line per criterion, exit status zero only if all pass.
int main() {
    std::vector<mgpe::acceptance::CriterionResult> results =
        mgpe::acceptance::run_all("acceptance_scratch");
    mgpe::acceptance::print(std::cout, results);
    bool ok = mgpe::acceptance::all_pass(results);
    std::cout << (ok ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL") << std::endl;
    return ok ? 0 : 1;
}
