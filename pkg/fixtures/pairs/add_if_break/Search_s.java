public class Search {
    public int indexOf(int[] data, int key) {
        int found = -1;
        for (int i = 0; i < data.length; i++) {
            if (data[i] == key) {
                found = i;
            }
        }
        return found;
    }
}
