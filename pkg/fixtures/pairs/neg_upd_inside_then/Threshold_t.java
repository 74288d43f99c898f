public class Threshold {
    public int level(int score) {
        int level = 0;
        if (score > 50) {
            level = 2;
        }
        return level;
    }
}
