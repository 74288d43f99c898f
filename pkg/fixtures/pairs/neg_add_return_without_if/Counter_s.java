public class Counter {
    private int hits;

    public void hit(int weight) {
        hits = hits + weight;
    }
}
