// Walks through the three-counter example: membership with fractions,
// intersection with a regular language, and the upward closure of a lifted
// witness.

#include <cvasreg/cvasreg.hpp>

#include <iostream>

using namespace cvasreg;

namespace {

const char* kInstance =
    "dimension 3\n"
    "transition a 1 0 0\n"
    "transition b -1 1 0\n"
    "transition c 0 -1 1\n"
    "source 0 0 0\n"
    "target 0 1/4 1/4\n";

void show_run(const Cvas& cvas, const Run& run) {
  auto cfg = simulate(cvas, run);
  std::cout << "  " << to_string(cfg[0]);
  for (std::size_t i = 0; i < run.steps.size(); ++i)
    std::cout << " -" << cvas.label(run.steps[i].letter) << "(" << to_string(run.steps[i].fraction) << ")-> "
              << to_string(cfg[i + 1]);
  std::cout << "\n";
}

}  // namespace

int main() {
  Instance inst = parse_instance(kInstance);
  const Cvas& cvas = inst.cvas;

  std::cout << "membership\n";
  for (const char* text : {"abbc", "abcabc", "abcbacabc", "bbc", "abcabca"}) {
    Word w = cvas.parse_word(text);
    auto fr = member(cvas, w, inst.source, inst.target);
    std::cout << ' ' << text << ": " << (fr ? "member" : "non-member") << "\n";
    if (fr) show_run(cvas, make_run(inst.source, w, *fr));
  }

  std::cout << "intersection with a(b|c)*c\n";
  auto out = regular_intersect_nonempty(cvas, parse_regex(cvas, "a(b|c)*c"), inst.source, inst.target, true);
  std::cout << "  " << (out.nonempty ? "non-empty" : "empty") << "\n";
  if (out.witness) show_run(cvas, *out.witness);

  std::cout << "lifting a witness of [G:abc/abc]\n";
  PathScheme p = parse_scheme("[G:abc/abc]", cvas);
  auto lifted = lift_run_witness(cvas, p, inst.source, inst.target);
  std::cout << "  center " << cvas.format_word(lifted.centers()[0]) << "\n";
  show_run(cvas, lifted.run);
  std::cout << "  upward closure " << format_scheme(scheme_upward_closure(p, lifted.centers()), cvas) << "\n";
  for (const auto& s : scheme_complement(p, lifted.centers()))
    std::cout << "  complement " << format_scheme(s, cvas) << "\n";
  Word bigger = cvas.parse_word("abcbacabc");
  if (scheme_accepts(scheme_upward_closure(p, lifted.centers()), bigger)) {
    std::cout << "  redistributed run for abcbacabc\n";
    show_run(cvas, redistribute_scheme(cvas, lifted, bigger));
  }
  return 0;
}
