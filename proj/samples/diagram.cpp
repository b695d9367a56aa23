// Loads an instance, prints its envelope and the full value diagram in both
// budget modes.
//
//   sample_diagram [instance.json]

#include <cstdio>
#include <string>

#include "robustmax/io.hpp"
#include "robustmax/robustmax.hpp"

int main(int argc, char** argv) {
  using namespace robustmax;
  const std::string path = argc > 1 ? argv[1] : std::string(SAMPLES_DIR) + "/symmetric.json";
  const Instance inst = load_instance(path);

  const ConcaveCurve hull = concavify(inst.utility);
  std::printf("envelope knots:");
  for (double k : hull.knots()) std::printf(" %g", k);
  std::printf("\n");

  int status = 0;
  for (bool constrained : {false, true}) {
    const DiagramReport rep = evaluate_diagram(inst, constrained);
    std::printf("%s:\n", constrained ? "constrained" : "unconstrained");
    if (rep.trivial) {
      std::printf("  trivial regime, X* = W\n");
      continue;
    }
    for (const auto& q : rep.quantities) std::printf("  %s = %.9f  (%s)\n", q.name.c_str(), q.value, q.formula.c_str());
    for (const auto& r : rep.relations) std::printf("  (%s) %s\n", r.name.c_str(), to_string(r.verdict));
    if (rep.any_violated()) status = 1;
  }
  return status;
}
