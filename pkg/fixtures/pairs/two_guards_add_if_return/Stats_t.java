public class Stats {
    public static double mean(double[] values) {
        if (values.length == 0) {
            return Double.NaN;
        }
        double sum = 0;
        for (int i = 0; i < values.length; i++) {
            sum += values[i];
        }
        return sum / values.length;
    }

    public static double max(double[] values) {
        if (values.length == 0) {
            return Double.NEGATIVE_INFINITY;
        }
        double best = values[0];
        for (int i = 1; i < values.length; i++) {
            best = Math.max(best, values[i]);
        }
        return best;
    }
}
