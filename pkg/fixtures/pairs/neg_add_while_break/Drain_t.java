public class Drain {
    public int drain(int[] queue) {
        int total = 0;
        int i = 0;
        while (i < queue.length) {
            total = total + queue[i];
            i++;
        }
        return total;
    }
}
