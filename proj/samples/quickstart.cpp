// Small tour: sieve d(n), evaluate Delta(x), compare with a short Voronoi
// series and look at a mean square.
#include <cstdio>

#include "dkl/dkl.hpp"

int main() {
  const auto ev = dkl::DeltaEvaluator::build(2, 200'000);
  std::printf("D(10) = %llu, Delta(10) = %.7f\n", static_cast<unsigned long long>(ev.summatory(10)), ev.delta(10.0));

  const auto series = dkl::VoronoiSeries::build(ev.table(), 1000);
  for (double x : {1000.5, 12345.5, 99999.5}) {
    std::printf("x = %-9g Delta = %+9.4f  Voronoi(1000 terms) = %+9.4f\n", x, ev.delta(x),
                dkl::truncated_voronoi(series, x));
  }

  const auto m = dkl::moment_integral(ev, 2, 2.0, 1e5);
  std::printf("int_2^1e5 Delta^2 / X^{3/2} = %.4f (limit %.4f)\n", m.value / std::pow(1e5, 1.5),
              dkl::mean_square_constant(2));
  return 0;
}
