public class Counter {
    private int hits;

    public int hit(int weight) {
        hits = hits + weight;
        return hits;
    }
}
