public class Factorial {
    public long compute(int n) {
        if (n < 0) {
            throw new IllegalArgumentException("negative input");
        }
        long acc = 1;
        for (int i = 2; i <= n; i++) {
            acc = acc * i;
        }
        return acc;
    }
}
