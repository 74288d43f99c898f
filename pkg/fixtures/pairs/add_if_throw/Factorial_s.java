public class Factorial {
    public long compute(int n) {
        long acc = 1;
        for (int i = 2; i <= n; i++) {
            acc = acc * i;
        }
        return acc;
    }
}
