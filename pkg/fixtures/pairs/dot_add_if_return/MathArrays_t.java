public class MathArrays {
    public static double linearCombination(final double[] a, final double[] b) {
        final int len = a.length;
        if (len != b.length) {
            throw new DimensionMismatchException(len, b.length);
        }
        if (len == 1) {
            return a[0] * b[0];
        }
        final double[] prodHigh = new double[len];
        double prodLowSum = 0;
        for (int i = 0; i < len; i++) {
            prodHigh[i] = a[i] * b[i];
        }
        return prodLowSum;
    }
}
