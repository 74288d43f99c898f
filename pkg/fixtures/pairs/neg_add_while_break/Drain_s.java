public class Drain {
    public int drain(int[] queue) {
        int total = 0;
        return total;
    }
}
