public class Stats {
    public static double mean(double[] values) {
        double sum = 0;
        for (int i = 0; i < values.length; i++) {
            sum += values[i];
        }
        return sum / values.length;
    }

    public static double max(double[] values) {
        double best = values[0];
        for (int i = 1; i < values.length; i++) {
            best = Math.max(best, values[i]);
        }
        return best;
    }
}
