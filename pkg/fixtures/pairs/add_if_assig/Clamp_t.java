public class Clamp {
    private int limit;

    public int apply(int value) {
        int result = value * 2;
        if (result > limit) {
            result = limit;
        }
        return result;
    }
}
