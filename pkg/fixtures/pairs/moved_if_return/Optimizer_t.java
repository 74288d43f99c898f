public class Optimizer {
    protected Pair doOptimize() {
        while (true) {
            updateResidualsAndCost();
            current = new Pair(point, objective);
            if (ratio >= 1.0e-4) {
                lmPar = 0;
                iterations = iterations + 1;
                if (checker.converged(getIterations(), previous, current)) {
                    return current;
                }
            }
        }
    }
}
