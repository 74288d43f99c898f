public class Range {
    public boolean contains(int lo, int hi, int x) {
        if (x >= lo) {
            return x < hi;
        }
        return false;
    }
}
